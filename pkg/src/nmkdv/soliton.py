"""
Reflectionless Riemann-Hilbert problem.

    m(z) = I + M0/z + sum_k [ A_k/(z - eta_k) + B_k/(z - eta_hat_k) ],   M0 = i sigma3 Q_- = i q_- sigma1,

with eta_hat_k = -1/eta_k. A_k has only a first column a_k and B_k only a second
column b_k, fixed by the residue conditions

    a_k = C_k e^{-2i theta(eta_k)}     m_col2(eta_k),
    b_k = C_k eta_k^-2 e^{2i theta(eta_hat_k)} m_col1(eta_hat_k).

Each row of (a, b) solves the same 2N x 2N linear system, and
q = -i (m1)_12 = q_- - i sum_k b_k[0].
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, RealityError, SingularSystemError
from .phase import Region, classify, re2itheta, soliton_activity, theta
from .scattering import BoundaryData, ScatteringData, Transmission
from .utils import IDENTITY, SIGMA1, from_pair, to_pair

log = logging.getLogger("nmkdv.soliton")

COND_LIMIT = 1e12
REALITY_TOL = 1e-9


@dataclass
class ReflectionlessData:
    pairs: list
    boundary: BoundaryData = field(default_factory=BoundaryData.from_minus)

    def __post_init__(self):
        self.pairs = [(complex(e), complex(c)) for e, c in self.pairs]
        etas = self.eta
        for k, e in enumerate(etas):
            if e == 0 or abs(e - 1j) < 1e-12 or abs(e + 1j) < 1e-12:
                raise DomainError(f"pole {e} sits on a branch point of the uniformization")
            if classify(e) == Region.CONTOUR:
                raise DomainError(f"pole {e} lies on the contour")
            if any(abs(e - f) < 1e-12 for f in etas[:k]):
                raise DomainError(f"pole {e} is repeated")

    @property
    def eta(self) -> list[complex]:
        return [e for e, _ in self.pairs]

    @property
    def c_hat(self) -> list[complex]:
        return [c for _, c in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json(self) -> dict:
        b = self.boundary
        return {
            "q_minus": b.q_minus,
            "delta": b.delta,
            "poles": [{"eta": to_pair(e), "c_hat": to_pair(c)} for e, c in self.pairs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReflectionlessData":
        boundary = BoundaryData.from_minus(data.get("q_minus", 1.0), data.get("delta", 1))
        pairs = [(from_pair(p["eta"]), from_pair(p["c_hat"])) for p in data.get("poles", [])]
        return cls(pairs=pairs, boundary=boundary)

    @classmethod
    def load(cls, path: Path) -> "ReflectionlessData":
        with Path(path).open("r") as f:
            return cls.from_json(json.load(f))


@dataclass
class OuterSolution:
    data: ReflectionlessData
    x: float
    t: float
    a: np.ndarray  # (N, 2) first-column residues at eta_k
    b: np.ndarray  # (N, 2) second-column residues at eta_hat_k

    @property
    def m0(self) -> np.ndarray:
        return 1j * self.data.boundary.q_minus * SIGMA1

    def evaluate(self, z: complex) -> np.ndarray:
        z = complex(z)
        if z == 0:
            raise DomainError("m(z) has a pole at z = 0")
        m = IDENTITY + self.m0 / z
        for e, ak, bk in zip(self.data.eta, self.a, self.b):
            m[:, 0] += ak / (z - e)
            m[:, 1] += bk / (z + 1 / e)
        return m

    @property
    def first_moment(self) -> np.ndarray:
        m1 = self.m0.copy()
        m1[:, 0] += self.a.sum(axis=0)
        m1[:, 1] += self.b.sum(axis=0)
        return m1

    @property
    def q_complex(self) -> complex:
        return complex(-1j * self.first_moment[0, 1])

    @property
    def q_sol(self) -> float:
        q = self.q_complex
        if abs(q.imag) >= REALITY_TOL:
            raise RealityError(f"q_sol({self.x}, {self.t}) has imaginary part {q.imag:.3e}")
        return q.real


def phase_factors(data: ReflectionlessData, x: float, t: float) -> np.ndarray:
    """e^{-2i theta(eta_k; x, t)}; the only way (x, t) enters the outer model."""
    if not len(data):
        return np.zeros(0, dtype=complex)
    return np.exp(-2j * theta(np.array(data.eta), x, t))


def _worst_pair(block: np.ndarray) -> tuple[int, int]:
    k, j = np.unravel_index(int(np.argmax(np.abs(block))), block.shape)
    return int(k), int(j)


def solve_outer(data: ReflectionlessData, x: float, t: float, phases: Optional[np.ndarray] = None) -> OuterSolution:
    """Residues of the reflectionless model at (x, t). `phases` overrides phase_factors(data, x, t)."""
    n = len(data)
    q_minus = data.boundary.q_minus
    if n == 0:
        return OuterSolution(data=data, x=x, t=t, a=np.zeros((0, 2), complex), b=np.zeros((0, 2), complex))

    eta = np.array(data.eta)
    eta_hat = -1 / eta
    ph = phase_factors(data, x, t) if phases is None else np.asarray(phases, dtype=complex)
    # theta(-1/z) = -theta(z), so e^{2i theta(eta_hat)} equals e^{-2i theta(eta)}
    c = np.array(data.c_hat) * ph
    c_mirror = np.array(data.c_hat) / eta**2 * ph

    K1 = 1 / (eta[:, None] - eta_hat[None, :])
    K2 = 1 / (eta_hat[:, None] - eta[None, :])
    upper = -c[:, None] * K1
    lower = -c_mirror[:, None] * K2
    system = np.block([[np.eye(n), upper], [lower, np.eye(n)]])
    # rows with |c| > 1 are divided by |c| so the LU pivots stay O(1)
    rows = 1 / np.maximum(1.0, np.abs(np.concatenate([c, c_mirror])))
    system = system * rows[:, None]

    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        pair = _worst_pair(np.abs(upper) + np.abs(lower))
        raise SingularSystemError(f"outer system condition number {cond:.3e} at (x={x}, t={t}); worst pole pair {pair}", pair)

    rhs = np.zeros((2 * n, 2), dtype=complex)
    # row 0: m_col2 contributes i q_- / eta_k, m_col1 contributes 1
    rhs[:n, 0] = c * (1j * q_minus / eta)
    rhs[n:, 0] = c_mirror
    # row 1: m_col2 contributes 1, m_col1 contributes i q_- / eta_hat_k
    rhs[:n, 1] = c
    rhs[n:, 1] = c_mirror * (1j * q_minus / eta_hat)
    rhs *= rows[:, None]
    sol = np.linalg.solve(system, rhs)
    # one step of iterative refinement
    sol += np.linalg.solve(system, rhs - system @ sol)
    return OuterSolution(data=data, x=x, t=t, a=sol[:n], b=sol[n:])


def q_sol(data: ReflectionlessData, x: float, t: float) -> float:
    return solve_outer(data, x, t).q_sol


def q_sol_grid(data: ReflectionlessData, xs: Sequence[float], ts: Sequence[float], threads: int = 1) -> np.ndarray:
    """q_sol on the tensor grid, shape (len(ts), len(xs)); rows are filled in order."""
    xs, ts = list(xs), list(ts)

    def row(t):
        return [q_sol(data, x, t) for x in xs]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return np.array(list(pool.map(row, ts)), dtype=float)


def modify_for_lambda(
    scat: ScatteringData,
    transmission: Transmission,
    boundary: BoundaryData,
    eps_lambda: float = 1e-8,
) -> ReflectionlessData:
    """Restricts the pole data to Lambda(xi) and rescales c_hat_k -> c_hat_k T(eta_k)^-2."""
    active = soliton_activity(scat.eta, transmission.xi, eps_lambda)
    pairs = []
    for k in active:
        eta, c = scat.poles[k]
        pairs.append((eta, c * transmission(eta) ** -2))
    if not pairs and boundary.delta == -1:
        log.warning("xi=%s: no active poles and delta = -1; the constant background does not meet the q_+ = -q_- boundary", transmission.xi)
    log.debug("xi=%s: %d of %d poles active", transmission.xi, len(pairs), len(scat.poles))
    return ReflectionlessData(pairs=pairs, boundary=boundary)


# --- ADMISSIBLE POLE DATA ---
def admissible_orbit(seed: complex, sign: int = 1) -> list[tuple[complex, int]]:
    """
    Symmetry orbit {eta, -conj(eta), 1/eta, -1/conj(eta)} of a seed in D+, with
    norming signs b = sign on the outer pair and -sign on the inner pair.
    Imaginary seeds collapse to the pair {iy, -i/y}.
    """
    seed = complex(seed)
    if classify(seed) != Region.DPLUS or abs(seed) <= 1:
        raise DomainError(f"seed {seed} must lie in D+ outside the unit circle")
    orbit = [(seed, sign), (-seed.conjugate(), sign), (1 / seed, -sign), (-1 / seed.conjugate(), -sign)]
    out: list[tuple[complex, int]] = []
    for e, b in orbit:
        if all(abs(e - f) > 1e-12 for f, _ in out):
            out.append((e, b))
    return out


def admissible_data(seeds: Sequence[complex], signs: Optional[Sequence[int]] = None,
                    q_minus: float = 1.0) -> ReflectionlessData:
    """
    PT-symmetric reflectionless data for sigma = -1, delta = 1. The norming
    constants follow from the trace formula s11(z) = prod (z - eta_k)/(z - eta_hat_k):
    C_k = b_k / s11'(eta_k).
    """
    signs = list(signs) if signs is not None else [1] * len(seeds)
    orbit = [p for s, b in zip(seeds, signs) for p in admissible_orbit(s, b)]
    eta = np.array([e for e, _ in orbit])
    if len({round(e.real, 10) + 1j * round(e.imag, 10) for e in eta}) != eta.size:
        raise DomainError("seed orbits overlap")
    eta_hat = -1 / eta
    pairs = []
    for k, (e, b) in enumerate(orbit):
        num = np.prod([e - f for j, f in enumerate(eta) if j != k])
        den = np.prod(e - eta_hat)
        pairs.append((e, b * q_minus / (num / den)))
    return ReflectionlessData(pairs=pairs, boundary=BoundaryData.from_minus(q_minus, 1))


def breather_seed(xi: float, alpha: float = np.pi / 4, bracket: tuple[float, float] = (1.01, 5.0)) -> complex:
    """Seed r e^{i alpha} whose exponential is stationary on the ray xi."""
    f = lambda r: float(re2itheta(r * np.exp(1j * alpha), xi, 1.0))
    lo, hi = bracket
    if f(lo) * f(hi) > 0:
        raise ConvergenceError(f"no stationary pole on arg z = {alpha:.4f} for xi = {xi} in r in {bracket}")
    r = brentq(f, lo, hi, xtol=1e-14)
    return complex(r * np.exp(1j * alpha))
