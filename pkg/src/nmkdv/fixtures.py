"""Bundled datasets used by the invariant suite, the CLI and the tests."""
import numpy as np

from .scattering import BoundaryData, InitialDatum, ScatteringData
from .soliton import ReflectionlessData, admissible_data, breather_seed, q_sol

BOUNDARY = BoundaryData.from_minus(1.0, 1)

ONE_POLE_SEEDS = [1.2j]
TWO_POLE_SEEDS = [1.2j, 1.6j]
THREE_POLE_SEEDS = [1.2j, 1.6j, 2.2j]


def background_datum(L: float = 10.0, h: float = 0.05) -> InitialDatum:
    return InitialDatum.from_function(lambda x: np.ones_like(x), L, h, BOUNDARY)


def perturbed_datum(L: float = 12.0, h: float = 0.02, amplitude: float = 0.2, width: float = 1.0) -> InitialDatum:
    """Background plus a Gaussian bump."""
    return InitialDatum.from_function(lambda x: 1 + amplitude * np.exp(-(x / width) ** 2), L, h, BOUNDARY)


def truncated_datum() -> InitialDatum:
    """Support cut before the bump has decayed; fails the decay check."""
    return InitialDatum.from_function(lambda x: 1 + 0.5 * np.exp(-(x / 2.0) ** 2), 2.0, 0.05, BOUNDARY)


def one_pole(y: float = 1.2) -> ReflectionlessData:
    return admissible_data([1j * y])


def two_pole() -> ReflectionlessData:
    return admissible_data(TWO_POLE_SEEDS, signs=[1, -1])


def three_pole() -> ReflectionlessData:
    return admissible_data(THREE_POLE_SEEDS, signs=[1, -1, 1])


def breather_poles(xi: float = -3.0) -> ReflectionlessData:
    """Quartet whose exponentials are stationary on the ray xi."""
    return admissible_data([breather_seed(xi)])


def soliton_datum(y: float = 2.0, L: float = 15.0, h: float = 0.02, t: float = 0.0) -> InitialDatum:
    data = one_pole(y)
    return InitialDatum.from_function(lambda xs: np.array([q_sol(data, x, t) for x in xs]), L, h, BOUNDARY)


def radiation_rho(z, eps: float = 0.1):
    z = np.asarray(z, dtype=complex)
    phi = np.angle(z)
    return 1j * eps * (1 + 0.5 * np.cos(2 * phi)) * np.exp(1j * phi)


def radiation_rho_tilde(z, eps: float = 0.1):
    z = np.asarray(z, dtype=complex)
    phi = np.angle(z)
    return -1j * eps * (1 + 0.5 * np.cos(2 * phi)) * np.exp(-1j * phi)


def radiation_scattering(eps: float = 0.1, n_circle: int = 256, poles=()) -> ScatteringData:
    """
    Smooth reflection data on the unit circle with rho rho_tilde real and
    positive. rho(-conj z) = conj rho(z), the symmetry of a real potential.
    """
    return ScatteringData.from_functions(
        lambda z: radiation_rho(z, eps),
        lambda z: radiation_rho_tilde(z, eps),
        poles=poles,
        n_circle=n_circle,
    )


def mixed_scattering(xi: float = -3.0, eps: float = 0.1, n_circle: int = 256) -> ScatteringData:
    """Radiation plus a breather quartet that is active on the ray xi and a pole pair that is not."""
    poles = breather_poles(xi).pairs + one_pole(1.2).pairs
    return radiation_scattering(eps, n_circle, poles)


REGISTRY = {
    "background": background_datum,
    "perturbed": perturbed_datum,
    "truncated": truncated_datum,
    "soliton": soliton_datum,
}

POLE_REGISTRY = {
    "one_pole": one_pole,
    "two_pole": two_pole,
    "three_pole": three_pole,
    "breather": breather_poles,
}
