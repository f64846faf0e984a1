"""
Leading-order long-time asymptotics on a ray xi = x/t in (-6, 6):

    q(x, t) = c q_sol(x, t; Lambda(xi)) - t^{-1/2} f + O(t^{-1}),
    f = sum_i (2 sqrt(theta''(zeta_i)))^{-1} (m11(zeta_i)^2 beta12_i + m12(zeta_i)^2 beta21_i),

where m is the outer (reflectionless) model and beta are the parabolic
cylinder coefficients at the four stationary points.
"""
import cmath
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_CONFIG
from .errors import BranchError, PoleError, RealityError, RegionError
from .phase import SaddleSet, stationary_points, theta
from .scattering import BoundaryData, ScatteringData, Transmission, nu, partial_transmission
from .soliton import OuterSolution, modify_for_lambda, solve_outer
from .utils import IDENTITY

log = logging.getLogger("nmkdv.asymptotics")

# "nu": e^{-pi nu / 2}; "literal": e^{-pi/2} * nu
BETA_EXPONENT_READING = "nu"
ERROR_ORDER = "O(t^-1)"
IMAG_TOL = 1e-8

# --- GAMMA FUNCTION ---
_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def complex_gamma(w: complex) -> complex:
    """Lanczos (g = 7, n = 9) with the reflection formula for Re w < 1/2."""
    w = complex(w)
    if w.imag == 0 and w.real <= 0 and w.real == int(w.real):
        raise PoleError(f"Gamma has a pole at w = {w.real:g}")
    if w.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * w) * complex_gamma(1 - w))
    w -= 1
    x = _LANCZOS_COEF[0]
    for i, p in enumerate(_LANCZOS_COEF[1:], start=1):
        x += p / (w + i)
    s = w + _LANCZOS_G + 0.5
    return cmath.sqrt(2 * cmath.pi) * s ** (w + 0.5) * cmath.exp(-s) * x


# --- PARABOLIC CYLINDER COEFFICIENTS ---
@dataclass(frozen=True)
class PCCoefficients:
    index: int
    zeta: complex
    sqrt_ddtheta: complex
    rho: complex
    rho_tilde: complex
    rho_z: complex
    rho_tilde_z: complex
    nu: float
    beta12: complex
    beta21: complex
    mirrored: bool = False

    @property
    def m1(self) -> np.ndarray:
        """Strictly off-diagonal 1/zeta coefficient of the parabolic cylinder model."""
        return np.array([[0, self.beta12], [-self.beta21, 0]], dtype=complex)

    def as_record(self) -> dict:
        c = lambda v: [float(np.real(v)), float(np.imag(v))]
        return {
            "index": self.index, "zeta": c(self.zeta), "sqrt_ddtheta": c(self.sqrt_ddtheta),
            "rho": c(self.rho), "rho_tilde": c(self.rho_tilde), "rho_z": c(self.rho_z),
            "rho_tilde_z": c(self.rho_tilde_z), "nu": self.nu,
            "beta12": c(self.beta12), "beta21": c(self.beta21), "mirrored": self.mirrored,
        }


def _damping(nu_i: float, reading: str) -> float:
    if reading == "nu":
        return np.exp(-np.pi * nu_i / 2)
    if reading == "literal":
        return np.exp(-np.pi / 2) * nu_i
    raise ValueError(f"unknown beta exponent reading {reading!r}")


def pc_coefficients(
    scat: ScatteringData,
    saddle: SaddleSet,
    i: int,
    x: float,
    t: float,
    transmission: Optional[Transmission] = None,
    reading: Optional[str] = None,
) -> PCCoefficients:
    """
    beta at saddle i. Where theta'' zeta^2 > 0 (Re zeta < 0) the unit circle is the
    imaginary axis of the local variable, and the model is the conjugate image of
    the one at -conj(zeta): log(-4t theta''), Gamma(-i nu) and the opposite sign on
    beta21. For data with rho(-conj z) = conj rho(z) this pairs the saddles so f is real.
    """
    zeta = complex(saddle.zeta[i])
    dd = complex(saddle.ddtheta_at[i])
    sq = complex(saddle.sqrt_ddtheta[i])
    nu_i = nu(scat, zeta)
    rho = complex(scat.rho_at(zeta))
    rho_t = complex(scat.rho_tilde_at(zeta))

    mirrored = (dd * zeta**2).real > 0
    sign = -1 if mirrored else 1
    arg = sign * 4 * t * dd
    if arg.real < 0 and abs(arg.imag) <= 1e-12 * abs(arg):
        raise BranchError(f"{sign * 4}t theta''(zeta_{i + 1}) = {arg} lies on the log branch cut")
    if transmission is None:
        transmission = partial_transmission(scat, saddle)
    T = transmission.at_saddle(zeta)

    phase = -2j * complex(theta(zeta, x, t)) + sign * 1j * nu_i * cmath.log(arg)
    rho_z = rho * T**-2 * cmath.exp(phase)
    rho_tilde_z = rho_t * T**2 * cmath.exp(-phase)

    if nu_i == 0 or rho == 0:
        beta12 = beta21 = 0j
    else:
        damp = _damping(nu_i, reading or BETA_EXPONENT_READING)
        gam = complex_gamma(sign * 1j * nu_i)
        root = np.sqrt(2 * np.pi)
        beta12 = -root * cmath.exp(1j * np.pi / 4) * damp / (rho_z * gam)
        beta21 = -sign * root * cmath.exp(-1j * np.pi / 4) * damp * (1 - rho * rho_t) / (rho_z * gam)
        # follow the tracked sqrt(theta'') branch, not the reference one
        ref = 1j * np.conj(cmath.sqrt(-np.conj(dd))) if mirrored else cmath.sqrt(dd)
        branch = 1.0 if abs(sq - ref) <= abs(sq + ref) else -1.0
        beta12, beta21 = branch * beta12, branch * beta21

    return PCCoefficients(index=i, zeta=zeta, sqrt_ddtheta=sq, rho=rho, rho_tilde=rho_t,
                          rho_z=rho_z, rho_tilde_z=rho_tilde_z, nu=nu_i,
                          beta12=complex(beta12), beta21=complex(beta21), mirrored=mirrored)


def local_model(saddle: SaddleSet, pcs: Sequence[PCCoefficients], z: complex, t: float) -> np.ndarray:
    m = IDENTITY.copy()
    for pc in pcs:
        m = m + 0.5 * t**-0.5 * pc.m1 / (pc.sqrt_ddtheta * (complex(z) - pc.zeta))
    return m


def _conjugated(outer: OuterSolution, pc: PCCoefficients) -> np.ndarray:
    m = outer.evaluate(pc.zeta)
    return m @ pc.m1 @ np.linalg.inv(m)


def error_term_E1(outer: OuterSolution, saddle: SaddleSet, pcs: Sequence[PCCoefficients], t: float) -> np.ndarray:
    """Leading error matrix; the remainder is O(t^-1)."""
    e1 = np.zeros((2, 2), dtype=complex)
    for pc in pcs:
        e1 += t**-0.5 / (2j * pc.sqrt_ddtheta) * _conjugated(outer, pc)
    return e1


def radiation_terms(outer: OuterSolution, pcs: Sequence[PCCoefficients]) -> np.ndarray:
    """Per-saddle summands of f."""
    out = []
    for pc in pcs:
        m = outer.evaluate(pc.zeta)
        out.append((m[0, 0] ** 2 * pc.beta12 + m[0, 1] ** 2 * pc.beta21) / (2 * pc.sqrt_ddtheta))
    return np.array(out, dtype=complex)


def radiation_coefficient_f(outer: OuterSolution, saddle: SaddleSet, pcs: Sequence[PCCoefficients]) -> complex:
    return complex(np.sum(radiation_terms(outer, pcs)))


def dual_path_ratios(outer: OuterSolution, pcs: Sequence[PCCoefficients], t: float) -> list[dict]:
    """
    Per saddle, -i (E1_i)_12 t^{1/2} against the f summand. The ratio equals
    -1/det m(zeta_i), so `ratio_times_det` is the constant -1.
    """
    rows = []
    for pc, f_i in zip(pcs, radiation_terms(outer, pcs)):
        e1_i = t**-0.5 / (2j * pc.sqrt_ddtheta) * _conjugated(outer, pc)
        lhs = -1j * e1_i[0, 1] * t**0.5
        det = complex(np.linalg.det(outer.evaluate(pc.zeta)))
        ratio = lhs / f_i if f_i != 0 else complex("nan")
        rows.append({"index": pc.index, "ratio": ratio, "det_m": det, "ratio_times_det": ratio * det})
    return rows


# --- ASSEMBLY ---
@dataclass
class AsymptoticResult:
    x: float
    t: float
    xi: float
    q_sol_term: float
    f: complex
    q_asym: float
    q_asym_imag: float
    c: float
    c_candidate: complex
    active_poles: int
    envelope: float
    error_order: str = ERROR_ORDER
    saddle: Optional[SaddleSet] = None
    pcs: list = field(default_factory=list)
    dual_path: list = field(default_factory=list)

    def as_row(self) -> dict:
        return {"xi": self.xi, "t": self.t, "q_sol": self.q_sol_term, "re_f": self.f.real,
                "im_f": self.f.imag, "q_asym": self.q_asym, "envelope": self.envelope,
                "error_order": self.error_order}

    def intermediates(self) -> dict:
        c = lambda v: [float(np.real(v)), float(np.imag(v))]
        return {
            "x": self.x, "t": self.t, "xi": self.xi, "error_order": self.error_order,
            "c": self.c, "c_candidate": c(self.c_candidate), "active_poles": self.active_poles,
            "saddles": self.saddle.as_record() if self.saddle else None,
            "pc": [p.as_record() for p in self.pcs],
            "dual_path": [{k: (c(v) if isinstance(v, complex) else v) for k, v in row.items()} for row in self.dual_path],
        }


class AsymptoticEngine:
    """
    Evaluates q_asym for one scattering dataset. The partial transmission is
    cached per xi and the parabolic cylinder coefficients per (xi, t); both
    caches are guarded by one lock and safe for concurrent readers.
    """

    def __init__(self, scat: ScatteringData, boundary: Optional[BoundaryData] = None, settings: Optional[dict] = None):
        self.scat = scat
        self.boundary = boundary or BoundaryData.from_minus()
        self.settings = {**DEFAULT_CONFIG, **(settings or {})}
        self._lock = threading.Lock()
        self._transmissions: dict[float, tuple[SaddleSet, Transmission]] = {}
        self._pcs: dict[tuple[float, float], list[PCCoefficients]] = {}

    def geometry(self, xi: float) -> tuple[SaddleSet, Transmission]:
        with self._lock:
            hit = self._transmissions.get(xi)
        if hit is not None:
            return hit
        saddle = stationary_points(xi, degeneracy_tol=self.settings["degeneracy_tol"])
        if saddle.degenerate:
            raise RegionError(f"xi = {xi} is too close to the region edge for the asymptotic formula")
        tr = partial_transmission(self.scat, saddle, self.settings["eps_lambda"],
                                  self.settings["quad_panels"], self.settings["quad_order"])
        with self._lock:
            self._transmissions[xi] = (saddle, tr)
        return saddle, tr

    def coefficients(self, xi: float, t: float) -> list[PCCoefficients]:
        key = (xi, t)
        with self._lock:
            hit = self._pcs.get(key)
        if hit is not None:
            return hit
        saddle, tr = self.geometry(xi)
        pcs = [pc_coefficients(self.scat, saddle, i, xi * t, t, tr) for i in range(4)]
        with self._lock:
            self._pcs[key] = pcs
        return pcs

    def evaluate(self, x: float, t: float) -> AsymptoticResult:
        if t < self.settings["t_min"]:
            raise RegionError(f"t = {t} is below t_min = {self.settings['t_min']}")
        xi = x / t
        saddle, tr = self.geometry(xi)
        data = modify_for_lambda(self.scat, tr, self.boundary, self.settings["eps_lambda"])
        outer = solve_outer(data, x, t)
        pcs = self.coefficients(xi, t)
        terms = radiation_terms(outer, pcs)
        f = complex(np.sum(terms))

        c = 1.0
        c_candidate = tr.t_infinity**-2
        q_c = c * outer.q_complex - t**-0.5 * f
        if abs(q_c.imag) >= IMAG_TOL:
            raise RealityError(f"q_asym({x}, {t}) has imaginary part {q_c.imag:.3e}; f = {f:.6g}")
        log.debug("xi=%s t=%s: c=1, T(inf)^-2 candidate=%s", xi, t, c_candidate)

        return AsymptoticResult(
            x=x, t=t, xi=xi, q_sol_term=outer.q_sol, f=f, q_asym=q_c.real, q_asym_imag=q_c.imag,
            c=c, c_candidate=complex(c_candidate), active_poles=len(data),
            envelope=float(t**-0.5 * np.sum(np.abs(terms))),
            saddle=saddle, pcs=pcs, dual_path=dual_path_ratios(outer, pcs, t),
        )

    def ray(self, xi: float, times: Sequence[float]) -> list[AsymptoticResult]:
        return [self.evaluate(xi * t, t) for t in times]


def q_asymptotic(x: float, t: float, scat: ScatteringData, boundary: Optional[BoundaryData] = None,
                 settings: Optional[dict] = None) -> AsymptoticResult:
    return AsymptoticEngine(scat, boundary, settings).evaluate(x, t)
