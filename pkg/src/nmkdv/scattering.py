"""
Direct scattering for Phi_x = (ik sigma3 + Q) Phi with Q = [[0, q(x)], [sigma q(-x), 0]]
and finite density data q -> q_-, q_+ = delta q_- as x -> -inf, +inf.

Jost solutions satisfy psi_+-(x, z) e^{-i lambda x sigma3} -> E_+-(z). They are
integrated column by column on the background-subtracted variable

    u = E^{-1} psi_col e^{-+ i lambda x},   u' = (D_col + E^{-1} dQ(x) E) u,

with D_col1 = diag(0, -2i lambda), D_col2 = diag(2i lambda, 0) and dQ = Q - Q_+-.
u is constant on the background, and in D+ the analytic columns (psi_+ col 1,
psi_- col 2) integrate stably toward x = 0.

Conventions: psi_+ = psi_- s, so s11 = det(psi_+ col1, psi_- col2)/(1 + z^-2)
continues analytically into D+. rho = s21/s11, rho_tilde = s12/s11.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (
    BranchError,
    ConvergenceError,
    DecayError,
    DomainError,
    MultiplicityError,
    NonvanishingError,
    SingularError,
    SpectralSingularityError,
    StepError,
)
from .phase import Region, SaddleSet, classify, growing_poles
from .utils import from_pair, to_pair

log = logging.getLogger("nmkdv.scattering")

DECAY_TOL = 1e-8


# --- DOMAIN TYPES ---
@dataclass(frozen=True)
class BoundaryData:
    q_minus: float
    q_plus: float
    sigma: int
    delta: int

    def __post_init__(self):
        if abs(abs(self.q_minus) - 1) > 0 or abs(abs(self.q_plus) - 1) > 0:
            raise DomainError("finite density data needs |q_-| = |q_+| = 1")
        if self.sigma not in (-1, 1) or self.delta not in (-1, 1):
            raise DomainError("sigma and delta must be +1 or -1")
        if self.q_plus != self.delta * self.q_minus or self.sigma * self.delta != -1:
            raise DomainError("boundary data must satisfy q_+ = delta q_- and sigma delta = -1")

    @classmethod
    def from_minus(cls, q_minus: float = 1.0, delta: int = 1) -> "BoundaryData":
        return cls(q_minus=float(q_minus), q_plus=float(delta * q_minus), sigma=-delta, delta=delta)


@dataclass
class InitialDatum:
    x0: float
    h: float
    values: np.ndarray
    boundary: BoundaryData

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 5:
            raise DomainError("datum needs at least 5 real samples")
        if abs(self.x0 + (self.values.size - 1) * self.h / 2) > 1e-9 * max(1.0, abs(self.x0)):
            raise DomainError("datum grid must be symmetric about x = 0")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def L(self) -> float:
        return -self.x0

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    def decay_gap(self) -> tuple[float, float]:
        return (abs(self.values[0] - self.boundary.q_minus), abs(self.values[-1] - self.boundary.q_plus))

    def check_decay(self, tol: float = DECAY_TOL):
        left, right = self.decay_gap()
        if max(left, right) >= tol:
            raise DecayError(f"datum does not reach its boundary values: |q(-L)-q_-|={left:.2e}, |q(L)-q_+|={right:.2e}")

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.x, self.values)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], L: float, h: float, boundary: BoundaryData) -> "InitialDatum":
        n = int(round(2 * L / h)) + 1
        x = -L + h * np.arange(n)
        return cls(x0=-L, h=h, values=np.asarray(fn(x), dtype=float), boundary=boundary)

    def to_json(self) -> dict:
        b = self.boundary
        return {"x0": self.x0, "h": self.h, "n": self.n, "values": self.values.tolist(),
                "q_minus": b.q_minus, "sigma": b.sigma, "delta": b.delta}

    @classmethod
    def from_json(cls, data: dict) -> "InitialDatum":
        boundary = BoundaryData.from_minus(data["q_minus"], data["delta"])
        if data.get("sigma", boundary.sigma) != boundary.sigma:
            raise DomainError("sigma inconsistent with delta (sigma delta must be -1)")
        values = np.asarray(data["values"], dtype=float)
        if "n" in data and int(data["n"]) != values.size:
            raise DomainError(f"datum declares n={data['n']} but carries {values.size} values")
        return cls(x0=float(data["x0"]), h=float(data["h"]), values=values, boundary=boundary)

    @classmethod
    def load(cls, path: Path) -> "InitialDatum":
        with Path(path).open("r") as f:
            return cls.from_json(json.load(f))


# --- BACKGROUND ---
def gamma_det(z: complex) -> complex:
    """det E_+-(z) = 1 + z^-2."""
    return 1 + z**-2


def background_eigenvector_matrix(z: complex, boundary: BoundaryData, side: str = "minus") -> np.ndarray:
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    z = complex(z)
    if z == 0 or abs(z - 1j) == 0 or abs(z + 1j) == 0:
        raise DomainError(f"E(z) is undefined or singular at z = {z}")
    q = boundary.q_plus if side == "plus" else boundary.q_minus
    a = 1j * q / z
    return np.array([[1, a], [a, 1]], dtype=complex)


def _is_branch_point(z: complex) -> bool:
    return abs(z) < 1e-14 or abs(z - 1j) < 1e-12 or abs(z + 1j) < 1e-12


# --- JOST SOLUTIONS ---
def _jost_column(datum: InitialDatum, z: complex, side: str, col: int, rtol: float, atol: float,
                 xs: Optional[np.ndarray] = None) -> np.ndarray:
    """Column `col` (0 or 1) of psi_side(0, z), or of psi_side(x, z) for x in `xs` as an (n, 2) array."""
    b = datum.boundary
    E = background_eigenvector_matrix(z, b, side)
    Einv = np.array([[E[1, 1], -E[0, 1]], [-E[1, 0], E[0, 0]]]) / gamma_det(z)
    qb = b.q_plus if side == "plus" else b.q_minus
    lam = (z + 1 / z) / 2
    D = np.diag([0.0, -2j * lam]) if col == 0 else np.diag([2j * lam, 0.0])
    spline, sigma = datum.spline, b.sigma

    def rhs(x, u):
        dQ = np.array([[0.0, spline(x) - qb], [sigma * spline(-x) + qb, 0.0]], dtype=complex)
        return (D + Einv @ dQ @ E) @ u

    start = datum.x0 if side == "minus" else -datum.x0
    u0 = np.zeros(2, dtype=complex)
    u0[col] = 1.0
    if xs is None:
        sol = solve_ivp(rhs, (start, 0.0), u0, method="DOP853", rtol=rtol, atol=atol)
    else:
        end = max(float(np.max(xs)), 0.0) if side == "minus" else min(float(np.min(xs)), 0.0)
        sol = solve_ivp(rhs, (start, end), u0, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if sol.status != 0:
        raise StepError(f"Jost integration failed at z={z}: {sol.message}")
    if xs is None:
        return E @ sol.y[:, -1]
    # psi_col = E u e^{+i lambda x} for column 1, e^{-i lambda x} for column 2
    wave = np.exp((1j if col == 0 else -1j) * lam * xs)
    return (E @ sol.sol(xs) * wave).T


def jost_solutions(datum: InitialDatum, z: complex, rtol: float = 1e-10, atol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """
    (psi_-(0, z), psi_+(0, z)). On the contour both matrices are complete; off
    the contour only the analytic columns are filled and the others are NaN.
    """
    datum.check_decay()
    z = complex(z)
    if _is_branch_point(z):
        raise DomainError(f"Jost solutions are not normalized at z = {z}")
    region = classify(z)
    psi_m = np.full((2, 2), np.nan, dtype=complex)
    psi_p = np.full((2, 2), np.nan, dtype=complex)
    if region in (Region.CONTOUR, Region.DMINUS):
        psi_m[:, 0] = _jost_column(datum, z, "minus", 0, rtol, atol)
        psi_p[:, 1] = _jost_column(datum, z, "plus", 1, rtol, atol)
    if region in (Region.CONTOUR, Region.DPLUS):
        psi_p[:, 0] = _jost_column(datum, z, "plus", 0, rtol, atol)
        psi_m[:, 1] = _jost_column(datum, z, "minus", 1, rtol, atol)
    return psi_m, psi_p


def jost_profile(datum: InitialDatum, z: complex, xs: Sequence[float], rtol: float = 1e-10,
                 atol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """(psi_-(x, z), psi_+(x, z)) for contour z and x in the datum window, as (n, 2, 2) arrays."""
    datum.check_decay()
    z = complex(z)
    if _is_branch_point(z) or classify(z) != Region.CONTOUR:
        raise DomainError(f"Jost profiles are computed on the contour away from +-i, got z = {z}")
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0 or xs.min() < datum.x[0] or xs.max() > datum.x[-1]:
        raise DomainError(f"profile points must lie in [{datum.x[0]}, {datum.x[-1]}]")
    psi_m = np.stack([_jost_column(datum, z, "minus", c, rtol, atol, xs) for c in (0, 1)], axis=-1)
    psi_p = np.stack([_jost_column(datum, z, "plus", c, rtol, atol, xs) for c in (0, 1)], axis=-1)
    return psi_m, psi_p


def scattering_matrix(datum: InitialDatum, z: complex, rtol: float = 1e-10, atol: float = 1e-12) -> np.ndarray:
    """s(z) with psi_+ = psi_- s; det s = 1."""
    if classify(z) != Region.CONTOUR:
        raise DomainError(f"the full scattering matrix lives on the contour, z = {z}")
    psi_m, psi_p = jost_solutions(datum, z, rtol, atol)
    if abs(np.linalg.det(psi_m)) < 1e-12 or abs(np.linalg.det(psi_p)) < 1e-12:
        raise SingularError(f"det psi vanishes at z = {z}")
    return np.linalg.solve(psi_m, psi_p)


def s11(datum: InitialDatum, z: complex, rtol: float = 1e-10, atol: float = 1e-12) -> complex:
    """s11 on the contour and its analytic continuation into D+."""
    datum.check_decay()
    z = complex(z)
    if _is_branch_point(z) or classify(z) == Region.DMINUS:
        raise DomainError(f"s11 is evaluated on the closure of D+ away from 0, +-i; got z = {z}")
    c1 = _jost_column(datum, z, "plus", 0, rtol, atol)
    c2 = _jost_column(datum, z, "minus", 1, rtol, atol)
    return complex((c1[0] * c2[1] - c1[1] * c2[0]) / gamma_det(z))


def reflection_coefficients(
    datum: InitialDatum,
    zs: Sequence[complex],
    threads: int = 1,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rho, rho_tilde, det s - 1) sampled on contour points."""
    datum.check_decay()

    def one(z):
        s = scattering_matrix(datum, z, rtol, atol)
        if abs(s[0, 0]) < 1e-10:
            raise SpectralSingularityError(f"s11 vanishes on the contour at z = {z}")
        return s[1, 0] / s[0, 0], s[0, 1] / s[0, 0], np.linalg.det(s) - 1

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(one, [complex(z) for z in zs]))
    if not rows:
        empty = np.zeros(0, dtype=complex)
        return empty, empty.copy(), empty.copy()
    rho, rho_t, dets = (np.array(col, dtype=complex) for col in zip(*rows))
    return rho, rho_t, dets


def contour_samples(n_circle: int = 64) -> np.ndarray:
    """Unit-circle nodes at half-integer angles, which never hit z = +-1 or +-i when 4 | n."""
    phi = 2 * np.pi * (np.arange(n_circle) + 0.5) / n_circle
    return np.exp(1j * phi)


# --- DISCRETE SPECTRUM ---
def _polar_box_path(r0: float, r1: float, p0: float, p1: float, n: int) -> np.ndarray:
    """Closed counterclockwise boundary of {r0 < |z| < r1, p0 < arg z < p1}."""
    s = np.linspace(0, 1, n, endpoint=False)
    bottom = (r0 + (r1 - r0) * s) * np.exp(1j * p0)
    outer = r1 * np.exp(1j * (p0 + (p1 - p0) * s))
    top = (r1 - (r1 - r0) * s) * np.exp(1j * p1)
    inner = r0 * np.exp(1j * (p1 - (p1 - p0) * s))
    return np.concatenate([bottom, outer, top, inner])


def _winding(values: np.ndarray) -> tuple[int, float]:
    steps = np.angle(np.roll(values, -1) / values)
    return int(round(steps.sum() / (2 * np.pi))), float(np.max(np.abs(steps)))


def _newton_zero(f: Callable[[complex], complex], z: complex, tol: float, max_iter: int = 40) -> complex:
    for _ in range(max_iter):
        h = 1e-6 * max(1.0, abs(z))
        fz = f(z)
        dfz = (f(z + h) - f(z - h)) / (2 * h)
        if dfz == 0:
            break
        step = fz / dfz
        z = z - step
        if abs(step) < tol:
            return z
    raise ConvergenceError(f"Newton refinement of a zero of s11 failed near {z}")


def discrete_spectrum(
    datum: InitialDatum,
    r_inner: float = 0.05,
    r_outer: float = 20.0,
    margin: float = 1e-2,
    contour_points: int = 32,
    mesh: tuple[int, int] = (8, 12),
    tol: float = 1e-10,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> list[tuple[complex, complex]]:
    """
    Zeros eta of s11 in D+ (within r_inner < |z| < r_outer and `margin` away
    from the contour) with norming constants C = b / s11'(eta), where
    psi_+ col1(eta) = b psi_- col2(eta).
    """
    datum.check_decay()
    f = lambda z: s11(datum, z, rtol, atol)
    pieces = [
        (1 + margin, r_outer, margin, np.pi - margin),       # upper half-plane, outside the circle
        (r_inner, 1 - margin, -np.pi + margin, -margin),     # lower half-plane, inside the circle
    ]
    zeros: list[complex] = []
    for r0, r1, p0, p1 in pieces:
        n = contour_points
        while True:
            path = _polar_box_path(r0, r1, p0, p1, n)
            count, worst = _winding(np.array([f(z) for z in path]))
            if worst < np.pi / 3:
                break
            if n >= 16 * contour_points:
                raise ConvergenceError("argument-principle contour unresolved; phase jumps too large")
            n *= 2
        log.debug("winding number %d on piece r in (%.3g, %.3g)", count, r0, r1)
        if count == 0:
            continue

        rr = np.linspace(r0, r1, mesh[0] + 2)[1:-1]
        pp = np.linspace(p0, p1, mesh[1] + 2)[1:-1]
        grid = rr[:, None] * np.exp(1j * pp[None, :])
        mags = np.abs(np.vectorize(f, otypes=[complex])(grid))
        order = np.argsort(mags, axis=None)
        found: list[complex] = []
        for idx in order:
            if len(found) == count:
                break
            try:
                zr = _newton_zero(f, complex(grid.flat[idx]), tol)
            except (ConvergenceError, DomainError):
                continue
            inside = r0 < abs(zr) < r1 and p0 < np.angle(zr) < p1
            if inside and all(abs(zr - w) > 1e-6 for w in found):
                found.append(zr)
        if len(found) != count:
            raise ConvergenceError(f"argument principle counts {count} zeros but {len(found)} were refined")
        zeros.extend(found)

    spectrum = []
    for eta in zeros:
        h = 1e-5 * max(1.0, abs(eta))
        ds = (f(eta + h) - f(eta - h)) / (2 * h)
        if abs(ds) < 1e-8:
            raise MultiplicityError(f"zero of s11 at {eta} is not simple")
        c1 = _jost_column(datum, eta, "plus", 0, rtol, atol)
        c2 = _jost_column(datum, eta, "minus", 1, rtol, atol)
        j = int(np.argmax(np.abs(c2)))
        spectrum.append((complex(eta), complex(c1[j] / c2[j] / ds)))
    return sorted(spectrum, key=lambda p: (round(p[0].imag, 8), round(p[0].real, 8)))


# --- SCATTERING DATA ---
@dataclass
class ScatteringData:
    contour: np.ndarray
    rho: np.ndarray
    rho_tilde: np.ndarray
    poles: list = field(default_factory=list)
    T_infinity: Optional[complex] = None

    def __post_init__(self):
        self.contour = np.asarray(self.contour, dtype=complex)
        self.rho = np.asarray(self.rho, dtype=complex)
        self.rho_tilde = np.asarray(self.rho_tilde, dtype=complex)
        self.poles = [(complex(e), complex(c)) for e, c in self.poles]
        on_circle = np.abs(np.abs(self.contour) - 1) < 1e-9
        self._circle = self._periodic_splines(on_circle)
        real = ~on_circle & (np.abs(self.contour.imag) < 1e-12)
        order = np.argsort(self.contour[real].real)
        self._real = (self.contour[real].real[order], self.rho[real][order], self.rho_tilde[real][order])

    def _periodic_splines(self, mask):
        if mask.sum() < 4:
            return None
        phi = np.mod(np.angle(self.contour[mask]), 2 * np.pi)
        order = np.argsort(phi)
        phi = phi[order]
        ext = np.append(phi, phi[0] + 2 * np.pi)
        splines = []
        for arr in (self.rho[mask][order], self.rho_tilde[mask][order]):
            vals = np.append(arr, arr[0])
            splines.append((CubicSpline(ext, vals.real, bc_type="periodic"), CubicSpline(ext, vals.imag, bc_type="periodic")))
        return splines

    @property
    def eta(self) -> list[complex]:
        return [e for e, _ in self.poles]

    def _interp(self, z, which: int):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        on_circle = np.abs(np.abs(z) - 1) < 1e-9
        on_real = ~on_circle & (np.abs(z.imag) < 1e-12)
        if np.any(~(on_circle | on_real)):
            raise DomainError("reflection coefficients are only defined on the contour")
        if self._circle is not None and np.any(on_circle):
            re_s, im_s = self._circle[which]
            phi = np.mod(np.angle(z[on_circle]), 2 * np.pi)
            out[on_circle] = re_s(phi) + 1j * im_s(phi)
        xs, *vals = self._real
        if xs.size >= 2 and np.any(on_real):
            v = vals[which]
            out[on_real] = np.interp(z[on_real].real, xs, v.real, 0, 0) + 1j * np.interp(z[on_real].real, xs, v.imag, 0, 0)
        return out

    def rho_at(self, z):
        return self._interp(z, 0)

    def rho_tilde_at(self, z):
        return self._interp(z, 1)

    @classmethod
    def reflectionless(cls, poles: Sequence[tuple[complex, complex]]) -> "ScatteringData":
        return cls(contour=np.zeros(0), rho=np.zeros(0), rho_tilde=np.zeros(0), poles=list(poles))

    @classmethod
    def from_functions(cls, rho_fn, rho_tilde_fn, poles=(), n_circle: int = 256) -> "ScatteringData":
        zs = contour_samples(n_circle)
        return cls(contour=zs, rho=rho_fn(zs), rho_tilde=rho_tilde_fn(zs), poles=list(poles))

    def to_json(self) -> dict:
        return {
            "sigma_contour_samples": [
                {"z": to_pair(z), "rho": to_pair(r), "rho_tilde": to_pair(rt)}
                for z, r, rt in zip(self.contour, self.rho, self.rho_tilde)
            ],
            "poles": [{"eta": to_pair(e), "c_hat": to_pair(c)} for e, c in self.poles],
            "T_infinity": to_pair(self.T_infinity) if self.T_infinity is not None else None,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScatteringData":
        samples = data.get("sigma_contour_samples", [])
        t_inf = data.get("T_infinity")
        return cls(
            contour=[from_pair(s["z"]) for s in samples],
            rho=[from_pair(s["rho"]) for s in samples],
            rho_tilde=[from_pair(s["rho_tilde"]) for s in samples],
            poles=[(from_pair(p["eta"]), from_pair(p["c_hat"])) for p in data.get("poles", [])],
            T_infinity=from_pair(t_inf) if t_inf is not None else None,
        )

    @classmethod
    def load(cls, path: Path) -> "ScatteringData":
        with Path(path).open("r") as f:
            return cls.from_json(json.load(f))


# --- AUXILIARY FUNCTIONS ---
def nu(scat: ScatteringData, zeta: complex) -> float:
    """nu(zeta) = -log(1 - rho rho_tilde)/(2 pi); needs 1 - rho rho_tilde real positive."""
    w = complex(1 - scat.rho_at(zeta) * scat.rho_tilde_at(zeta))
    if abs(w.imag) > 1e-8 * max(1.0, abs(w)) or w.real <= 0:
        raise BranchError(f"1 - rho rho_tilde = {w} is not real positive at zeta = {zeta}")
    return float(-np.log(w.real) / (2 * np.pi))


@dataclass
class Transmission:
    """
    T(z) = prod_{k in Delta} (z - eta_hat_k)/(z - eta_k)
           * exp[ (2 pi i)^-1 int_{Sigma(xi)} log(1 - rho rho_tilde)(s) ((s - z)^-1 - (2s)^-1) ds ]

    Sigma(xi) is the pair of unit-circle arcs through z = 1 and z = -1 cut at the
    saddle points, oriented counterclockwise; Delta are the poles whose residue
    exponential grows along the ray.
    """
    xi: float
    arcs: list
    delta_poles: list
    nodes: np.ndarray
    weights: np.ndarray
    log_w: np.ndarray
    edges: list

    @classmethod
    def build(cls, scat: ScatteringData, saddle: SaddleSet, eps_lambda: float = 1e-8,
              panels: int = 32, order: int = 16) -> "Transmission":
        phi1 = float(np.angle(saddle.zeta[0]))
        arcs = [(-phi1, phi1), (np.pi - phi1, np.pi + phi1)]
        x, w = leggauss(order)
        nodes, weights, edges = [], [], []
        for a, b in arcs:
            cuts = np.linspace(a, b, panels + 1)
            edges.append(np.exp(1j * cuts))
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                phi = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                s = np.exp(1j * phi)
                nodes.append(s)
                weights.append(0.5 * (hi - lo) * w * 1j * s)  # ds = i s dphi
        nodes = np.concatenate(nodes)
        weights = np.concatenate(weights)
        one_minus = 1 - scat.rho_at(nodes) * scat.rho_tilde_at(nodes) if nodes.size else nodes
        if nodes.size and np.min(np.abs(one_minus)) < 1e-8:
            raise NonvanishingError("1 - rho rho_tilde vanishes on a quadrature panel")
        delta = [scat.eta[k] for k in growing_poles(scat.eta, saddle.xi, eps_lambda)]
        t = cls(xi=saddle.xi, arcs=arcs, delta_poles=delta, nodes=nodes, weights=weights,
                log_w=np.log(one_minus), edges=edges)
        t._scat = scat
        return t

    def _log_at(self, s: complex) -> complex:
        return complex(np.log(1 - self._scat.rho_at(s) * self._scat.rho_tilde_at(s)))

    def _nearest_on_arc(self, z: complex, arc) -> complex:
        a, b = arc
        phi = np.angle(z)
        # unwrap phi into [a, b] when possible
        phi = a + np.mod(phi - a, 2 * np.pi)
        if phi > b:
            phi = a if (phi - b) > (a + 2 * np.pi - phi) else b
        return complex(np.exp(1j * phi))

    def _log_integral(self, z: complex, edges: np.ndarray, drop_endpoint: bool) -> complex:
        """int_arc ds/(s - z), branch followed panel by panel."""
        d = edges - z
        if drop_endpoint:
            # z sits on an arc endpoint; the log-singular term is removed. The stripped
            # factor is log(s - zeta) at an arc end and log(zeta - s) at an arc start,
            # so T(-conj z) = conj T(z) holds at the saddles too.
            keep = np.abs(d) > 1e-13
            if keep.all():
                return complex(np.sum(np.log(d[1:] / d[:-1])))
            if not keep[0]:
                return complex(np.sum(np.log(d[2:] / d[1:-1])) + np.log(-d[1]))
            return complex(np.sum(np.log(d[1:-1] / d[:-2])) - np.log(d[-2]))
        return complex(np.sum(np.log(d[1:] / d[:-1])))

    def log_cauchy(self, z: complex, regularize: bool = False) -> complex:
        """log of the exponential factor of T at z (finite part when z is an arc endpoint)."""
        if self.nodes.size == 0:
            return 0j
        z = complex(z)
        total = -np.sum(self.log_w * self.weights / (2 * self.nodes))
        per_arc = self.nodes.size // len(self.arcs)
        for j, arc in enumerate(self.arcs):
            sl = slice(j * per_arc, (j + 1) * per_arc)
            s_star = self._nearest_on_arc(z, arc)
            f_star = self._log_at(s_star)
            total += np.sum((self.log_w[sl] - f_star) / (self.nodes[sl] - z) * self.weights[sl])
            total += f_star * self._log_integral(z, self.edges[j], regularize)
        return complex(total / (2j * np.pi))

    def rational(self, z: complex) -> complex:
        z = complex(z)
        out = 1.0 + 0j
        for e in self.delta_poles:
            out *= (z + 1 / e) / (z - e)
        return out

    def __call__(self, z: complex) -> complex:
        return self.rational(z) * np.exp(self.log_cauchy(z))

    def at_saddle(self, zeta: complex) -> complex:
        """Regularized T(zeta): the (z - zeta)^{i nu} singular factor is stripped (see _log_integral)."""
        return self.rational(zeta) * np.exp(self.log_cauchy(zeta, regularize=True))

    @property
    def t_infinity(self) -> complex:
        if self.nodes.size == 0:
            return 1.0 + 0j
        return complex(np.exp(-np.sum(self.log_w * self.weights / (2 * self.nodes)) / (2j * np.pi)))


def partial_transmission(scat: ScatteringData, saddle: SaddleSet, eps_lambda: float = 1e-8,
                         panels: int = 32, order: int = 16) -> Transmission:
    return Transmission.build(scat, saddle, eps_lambda, panels, order)
