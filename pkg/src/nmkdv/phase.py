"""
Uniformized spectral plane.

z = k + lambda with k = (z - 1/z)/2, lambda = (z + 1/z)/2, and the phase
theta = lambda [x + (4k^2 - 2) t]. Expanded in z,

    theta(z) = 1/2 [ t (z^3 + z^-3) + (x - 3t)(z + z^-1) ],

which makes theta(1/z) = theta(z) and theta(-1/z) = -theta(z) explicit.

Stationary points. On |z| = 1 write z = e^{i phi}; then lambda = cos(phi),
4k^2 = -4 sin^2(phi) and theta / t = cos(phi) (xi - 2 - 4 sin^2(phi)), so

    d(theta/t)/d(phi) = -sin(phi) (xi + 6 - 12 sin^2(phi)).

Besides z = +-1 the roots satisfy sin^2(phi) = (xi + 6)/12, one per quadrant,
and they exist exactly for -6 < xi < 6. Since d/dphi = i z d/dz, these are
roots of theta'(z) too; Newton on the analytic theta' refines them.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, RegionError

log = logging.getLogger("nmkdv.phase")

CONTOUR_TOL = 1e-12
NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 50
XI_MIN, XI_MAX = -6.0, 6.0


class Region(str, Enum):
    DPLUS = "DPlus"
    DMINUS = "DMinus"
    CONTOUR = "Contour"


@dataclass(frozen=True)
class UniformizedPoint:
    z: complex
    k: complex
    lam: complex
    region: Region


@dataclass(frozen=True)
class PhaseValue:
    theta: complex
    dtheta: complex
    ddtheta: complex
    re2itheta: float


@dataclass(frozen=True)
class SaddleSet:
    xi: float
    zeta: np.ndarray
    theta_at: np.ndarray
    ddtheta_at: np.ndarray
    sqrt_ddtheta: np.ndarray
    degenerate: bool = False
    iterations: tuple = field(default=(0, 0, 0, 0))

    def as_record(self) -> dict:
        pairs = lambda arr: [[float(v.real), float(v.imag)] for v in arr]
        return {
            "xi": self.xi,
            "zeta": pairs(self.zeta),
            "theta": pairs(self.theta_at),
            "ddtheta": pairs(self.ddtheta_at),
            "sqrt_ddtheta": pairs(self.sqrt_ddtheta),
            "degenerate": self.degenerate,
        }


def _check_nonzero(z):
    if np.any(np.asarray(z) == 0):
        raise DomainError("z = 0 is the pole of the uniformization")


def classify(z: complex, tol: float = CONTOUR_TOL) -> Region:
    z = complex(z)
    if abs(z.imag) < tol or abs(abs(z) - 1.0) < tol:
        return Region.CONTOUR
    return Region.DPLUS if (abs(z) - 1.0) * z.imag > 0 else Region.DMINUS


def uniformize(z: complex) -> UniformizedPoint:
    _check_nonzero(z)
    z = complex(z)
    return UniformizedPoint(z=z, k=(z - 1 / z) / 2, lam=(z + 1 / z) / 2, region=classify(z))


def theta(z, x: float, t: float):
    """Vectorized phase theta(z; x, t)."""
    _check_nonzero(z)
    z = np.asarray(z, dtype=complex)
    return 0.5 * (t * (z**3 + z**-3) + (x - 3 * t) * (z + 1 / z))


def dtheta(z, x: float, t: float):
    _check_nonzero(z)
    z = np.asarray(z, dtype=complex)
    return 0.5 * (3 * t * (z**2 - z**-4) + (x - 3 * t) * (1 - z**-2))


def ddtheta(z, x: float, t: float):
    _check_nonzero(z)
    z = np.asarray(z, dtype=complex)
    return 3 * t * (z + 2 * z**-5) + (x - 3 * t) * z**-3


def re2itheta(z, x: float, t: float):
    """Re(2i theta) = -2 Im(theta); the growth rate of e^{2i theta}."""
    return -2.0 * np.imag(theta(z, x, t))


def phase(z: complex, x: float, t: float) -> PhaseValue:
    th = complex(theta(z, x, t))
    return PhaseValue(
        theta=th,
        dtheta=complex(dtheta(z, x, t)),
        ddtheta=complex(ddtheta(z, x, t)),
        re2itheta=float(-2.0 * th.imag),
    )


def saddle_seed(xi: float) -> complex:
    """Closed-form first-quadrant stationary point, sin^2(phi) = (xi + 6)/12."""
    phi = np.arcsin(np.sqrt((xi + 6.0) / 12.0))
    return complex(np.exp(1j * phi))


def _newton(seed: complex, xi: float) -> tuple[complex, int]:
    z = complex(seed)
    for it in range(NEWTON_MAX_ITER + 1):
        f = complex(dtheta(z, xi, 1.0))
        if abs(f) < NEWTON_TOL:
            return z, it
        if it == NEWTON_MAX_ITER:
            break
        fp = complex(ddtheta(z, xi, 1.0))
        if fp == 0:
            break
        z = z - f / fp
    raise ConvergenceError(f"Newton did not reach |theta'| < {NEWTON_TOL:g} for xi={xi} from seed {seed}")


def _align(current: np.ndarray, reference: np.ndarray) -> np.ndarray:
    flip = np.abs(current + reference) < np.abs(current - reference)
    return np.where(flip, -current, current)


def stationary_points(
    xi: float,
    previous: Optional[SaddleSet] = None,
    seed_shift: complex = 0.0,
    degeneracy_tol: float = 1e-6,
) -> SaddleSet:
    """
    The four unit-circle stationary points for the ray xi = x/t, ordered by
    quadrant. `previous` (a neighbouring ray) fixes the branch of sqrt(theta'').
    """
    if not (XI_MIN < xi < XI_MAX):
        raise RegionError(f"xi = {xi} outside the solitonic region (-6, 6)")

    z1 = saddle_seed(xi)
    seeds = [z1, -np.conj(z1), -z1, np.conj(z1)]
    roots, iterations = [], []
    for s in seeds:
        root, it = _newton(s + seed_shift, xi)
        roots.append(root)
        iterations.append(it)
    zeta = np.array(roots, dtype=complex)

    dd = ddtheta(zeta, xi, 1.0)
    sq = np.sqrt(dd)
    if previous is not None:
        sq = _align(sq, previous.sqrt_ddtheta)

    degenerate = bool(np.min(np.abs(dd)) < degeneracy_tol)
    if degenerate:
        log.warning("xi=%s is near the region edge: min |theta''(zeta)| = %.3e", xi, np.min(np.abs(dd)))

    return SaddleSet(
        xi=float(xi),
        zeta=zeta,
        theta_at=theta(zeta, xi, 1.0),
        ddtheta_at=dd,
        sqrt_ddtheta=sq,
        degenerate=degenerate,
        iterations=tuple(iterations),
    )


def track_branches(sets: Sequence[SaddleSet]) -> list[SaddleSet]:
    """Makes sqrt(theta''(zeta_i)) continuous along a xi-sweep."""
    tracked: list[SaddleSet] = []
    for s in sets:
        if tracked:
            s = replace(s, sqrt_ddtheta=_align(s.sqrt_ddtheta, tracked[-1].sqrt_ddtheta))
        tracked.append(s)
    return tracked


def signature_table(
    xi: float,
    re_range: tuple[float, float],
    im_range: tuple[float, float],
    n: int,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Sign of Re(2i theta(z; xi, t=1)) on an n x n grid. Grid nodes at z = 0 are
    dropped. Returns (z, sign) as flat arrays in row-major order.
    """
    re = np.linspace(re_range[0], re_range[1], n)
    im = np.linspace(im_range[0], im_range[1], n)
    zz = (re[None, :] + 1j * im[:, None]).ravel()
    zz = zz[zz != 0]
    return zz, signature_at(zz, xi)


def signature_at(z, xi: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    val = re2itheta(z, xi, 1.0)
    r = np.abs(z)
    scale = np.maximum.reduce([np.ones_like(r), r**3, r**-3]) * max(1.0, abs(xi))
    sign = np.sign(val).astype(int)
    sign[np.abs(val) < 1e-10 * scale] = 0
    return sign


def soliton_activity(eta: Sequence[complex], xi: float, eps_lambda: float = 1e-8) -> list[int]:
    """Indices of poles whose exponential e^{2i theta} neither grows nor decays along the ray."""
    return [k for k, e in enumerate(eta) if abs(float(re2itheta(e, xi, 1.0))) <= eps_lambda]


def growing_poles(eta: Sequence[complex], xi: float, eps_lambda: float = 1e-8) -> list[int]:
    """Poles whose residue factor e^{-2i theta} grows in t along the ray."""
    return [k for k, e in enumerate(eta) if float(re2itheta(e, xi, 1.0)) < -eps_lambda]


def soliton_velocity(eta: complex) -> float:
    """Ray x/t on which the pole's exponential is stationary."""
    p = uniformize(eta)
    if abs(p.lam.imag) < CONTOUR_TOL:
        raise DomainError(f"pole {eta} has real lambda; no velocity")
    return float(-(p.lam * (4 * p.k**2 - 2)).imag / p.lam.imag)
