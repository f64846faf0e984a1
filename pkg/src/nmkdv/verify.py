"""
Independent oracles: finite-difference PDE residuals of closed-form evaluators,
power-law decay regression, a split-step integrator for the PT-symmetric
(local mKdV) reduction, and the aggregated invariant suite.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from .errors import BlowupError, DegenerateFitError, DomainError, EvalError, NmkdvError

log = logging.getLogger("nmkdv.verify")

Evaluator = Callable[[float, float], float]


# --- PDE RESIDUAL ---
# relative accuracy assumed for one evaluation of q
EVAL_EPS = 1e-13
# headroom on the Richardson estimate of the stencil error
TRUNCATION_SAFETY = 4.0


@dataclass
class ResidualReport:
    """
    Residuals on a (t, x) grid with a per-point tolerance: the O(h^2) stencil
    error estimated from the same stencil at 2h, plus the evaluation noise that
    the 1/h^3 of the q_xxx stencil amplifies.
    """
    xs: np.ndarray
    ts: np.ndarray
    h_x: float
    h_t: float
    residual: np.ndarray  # shape (len(ts), len(xs))
    tolerance: np.ndarray  # same shape

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def max_tolerance(self) -> float:
        return float(np.max(self.tolerance)) if self.tolerance.size else 0.0

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.residual) <= self.tolerance))

    def rows(self):
        for j, t in enumerate(self.ts):
            for i, x in enumerate(self.xs):
                yield {"x": float(x), "t": float(t), "r": float(self.residual[j, i]), "tol": float(self.tolerance[j, i])}

    def summary(self) -> dict:
        return {
            "grid": {"x": [float(self.xs[0]), float(self.xs[-1]), len(self.xs)],
                     "t": [float(self.ts[0]), float(self.ts[-1]), len(self.ts)]},
            "h_x": self.h_x,
            "h_t": self.h_t,
            "max_residual": self.max_residual,
            "max_tolerance": self.max_tolerance,
            "passed": self.passed,
        }


def _safe(q: Evaluator) -> Evaluator:
    def call(x, t):
        try:
            return float(q(x, t))
        except NmkdvError:
            raise
        except Exception as exc:
            raise EvalError(f"evaluator failed at (x={x}, t={t}): {exc}") from exc
    return call


def residual_at(q: Evaluator, sigma: int, x: float, t: float, h_x: float, h_t: float) -> float:
    """q_t - 6 sigma q(x,t) q(-x,-t) q_x + q_xxx with second-order central differences."""
    q_t = (q(x, t + h_t) - q(x, t - h_t)) / (2 * h_t)
    qp1, qm1 = q(x + h_x, t), q(x - h_x, t)
    qp2, qm2 = q(x + 2 * h_x, t), q(x - 2 * h_x, t)
    q_x = (qp1 - qm1) / (2 * h_x)
    q_xxx = (qp2 - 2 * qp1 + 2 * qm1 - qm2) / (2 * h_x**3)
    return q_t - 6 * sigma * q(x, t) * q(-x, -t) * q_x + q_xxx


def residual_tolerance(q: Evaluator, sigma: int, x: float, t: float, h_x: float, h_t: float,
                       fine: Optional[float] = None) -> float:
    """Bound on |residual_at| for an exact solution: Richardson stencil error plus amplified noise."""
    if fine is None:
        fine = residual_at(q, sigma, x, t, h_x, h_t)
    coarse = residual_at(q, sigma, x, t, 2 * h_x, 2 * h_t)
    truncation = abs(coarse - fine) / 3
    scale = max(1.0, abs(q(x, t)), abs(q(-x, -t)))
    noise = EVAL_EPS * scale * (1 / h_t + 6 * scale**2 / h_x + 3 / h_x**3)
    return TRUNCATION_SAFETY * truncation + noise


def pde_residual(
    q: Evaluator,
    sigma: int,
    xs: Sequence[float],
    ts: Sequence[float],
    h_x: float = 1e-3,
    h_t: float = 1e-3,
    threads: int = 1,
) -> ResidualReport:
    if sigma not in (-1, 1):
        raise DomainError("sigma must be +1 or -1")
    q = _safe(q)
    xs, ts = np.asarray(xs, dtype=float), np.asarray(ts, dtype=float)

    def point(x, t):
        r = residual_at(q, sigma, x, t, h_x, h_t)
        return r, residual_tolerance(q, sigma, x, t, h_x, h_t, fine=r)

    def row(t):
        return [point(x, t) for x in xs]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        out = np.array(list(pool.map(row, ts)), dtype=float).reshape(len(ts), len(xs), 2)
    return ResidualReport(xs=xs, ts=ts, h_x=h_x, h_t=h_t, residual=out[..., 0], tolerance=out[..., 1])


# --- DECAY REGRESSION ---
def decay_fit(samples: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope of log|value| against log t, with its standard error."""
    if len(samples) < 4:
        raise DegenerateFitError(f"need at least 4 samples, got {len(samples)}")
    t = np.array([s[0] for s in samples], dtype=float)
    v = np.abs(np.array([s[1] for s in samples], dtype=float))
    if np.any(t <= 0) or np.log10(t.max() / t.min()) < 2 - 1e-12:
        raise DegenerateFitError("times must be positive and span at least two decades")
    if np.any(v < 1e-14):
        raise DegenerateFitError("values below 1e-14 cannot be fitted on a log scale")
    fit = linregress(np.log(t), np.log(v))
    return float(fit.slope), float(fit.stderr)


# --- SPLIT-STEP EVOLUTION ---
@dataclass
class Evolution:
    x: np.ndarray
    q: np.ndarray
    t0: float
    t1: float
    steps: int
    casimir_start: float
    casimir_end: float

    @property
    def casimir_drift(self) -> float:
        return abs(self.casimir_end - self.casimir_start)


def casimir(q: np.ndarray, dx: float, q_minus: float = 1.0) -> float:
    """int (q^2 - q_-^2) dx on the periodic grid."""
    return float(dx * np.sum(q**2 - q_minus**2))


def splitstep_local_mkdv(
    q0: np.ndarray,
    x: np.ndarray,
    t_span: tuple[float, float],
    dt: float = 1e-3,
    q_minus: float = 1.0,
    sigma: int = -1,
    delta: int = 1,
) -> Evolution:
    """
    Strang splitting for q_t + 6 q^2 q_x + q_xxx = 0 on u = q - q_-, periodic on
    the sampled window. The linear part u_t = -6 q_-^2 u_x - u_xxx is exact in Fourier
    space; the advection u_t = -6(2 q_- u + u^2) u_x uses RK4 substeps.
    """
    if sigma != -1 or delta != 1:
        raise DomainError("split-step evolution is restricted to sigma = -1, delta = 1")
    x = np.asarray(x, dtype=float)
    n = x.size
    dx = x[1] - x[0]
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    k_max = np.max(np.abs(k))
    t0, t1 = t_span
    steps = max(1, int(np.ceil((t1 - t0) / dt - 1e-9)))
    dt = (t1 - t0) / steps
    half_linear = np.exp((1j * k**3 - 6j * q_minus**2 * k) * dt / 2)

    def advect(u):
        ux = np.real(np.fft.ifft(1j * k * np.fft.fft(u)))
        return -6 * (2 * q_minus * u + u**2) * ux

    u = np.asarray(q0, dtype=float) - q_minus
    norm0 = max(np.linalg.norm(u), 1e-300)
    c0 = casimir(u + q_minus, dx, q_minus)

    for step in range(steps):
        u = np.real(np.fft.ifft(half_linear * np.fft.fft(u)))
        speed = 6 * np.max(np.abs(2 * q_minus * u + u**2))
        if not np.isfinite(speed):
            raise BlowupError(f"non-finite field at t = {t0 + step * dt:.4f}")
        n_sub = max(1, int(np.ceil(dt * speed * k_max / 0.5)))
        h = dt / n_sub
        for _ in range(n_sub):
            k1 = advect(u)
            k2 = advect(u + h / 2 * k1)
            k3 = advect(u + h / 2 * k2)
            k4 = advect(u + h * k3)
            u = u + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        u = np.real(np.fft.ifft(half_linear * np.fft.fft(u)))
        if not np.all(np.isfinite(u)) or np.linalg.norm(u) > 10 * norm0 and norm0 > 1e-12:
            raise BlowupError(f"field norm grew tenfold by t = {t0 + (step + 1) * dt:.4f}")

    q = u + q_minus
    return Evolution(x=x, q=q, t0=t0, t1=t1, steps=steps, casimir_start=c0, casimir_end=casimir(q, dx, q_minus))


# --- INVARIANT SUITE ---
def symmetry_suite(reading: Optional[str] = None, seed: int = 7, full: bool = True) -> dict:
    """
    Runs the module invariants on the bundled fixtures. Failures are report
    entries, never exceptions.
    """
    from . import checks

    results = checks.run_all(reading=reading, seed=seed, full=full)
    passed = all(r["passed"] for r in results)
    log.info("suite: %d checks, %d failed", len(results), sum(not r["passed"] for r in results))
    return {"passed": passed, "checks": results}
