from dataclasses import replace

import numpy as np
import pytest
from scipy.special import gamma as scipy_gamma

from nmkdv import fixtures
from nmkdv.asymptotics import (
    IMAG_TOL,
    AsymptoticEngine,
    PCCoefficients,
    complex_gamma,
    dual_path_ratios,
    error_term_E1,
    local_model,
    pc_coefficients,
    q_asymptotic,
    radiation_coefficient_f,
    radiation_terms,
)
from nmkdv.errors import PoleError, RealityError, RegionError
from nmkdv.phase import stationary_points, theta
from nmkdv.scattering import ScatteringData, partial_transmission
from nmkdv.soliton import ReflectionlessData, solve_outer
from nmkdv.verify import decay_fit


def _pcs(scat, xi, t, saddle=None, reading=None):
    saddle = saddle or stationary_points(xi)
    tr = partial_transmission(scat, saddle)
    return saddle, [pc_coefficients(scat, saddle, i, xi * t, t, tr, reading) for i in range(4)]


# --- GAMMA ---
def test_gamma_known_values():
    assert abs(complex_gamma(0.5) - np.sqrt(np.pi)) < 1e-13
    assert abs(complex_gamma(1) - 1) < 1e-13
    assert abs(complex_gamma(5) - 24) < 1e-11


@pytest.mark.parametrize("v", [0.1, 1.0, 2.0])
def test_gamma_imaginary_modulus(v):
    exact = np.pi / (v * np.sinh(np.pi * v))
    assert abs(complex_gamma(1j * v)) ** 2 == pytest.approx(exact, rel=1e-11)


@pytest.mark.parametrize("w", [0.3 + 4j, 2.5 - 7j, -1.5 + 0.5j, 1.0 + 10j, -3.2 - 2j])
def test_gamma_matches_scipy(w):
    assert complex_gamma(w) == pytest.approx(complex(scipy_gamma(w)), rel=1e-11)


@pytest.mark.parametrize("w", [0, -1, -7])
def test_gamma_poles(w):
    with pytest.raises(PoleError):
        complex_gamma(w)


# --- PARABOLIC CYLINDER COEFFICIENTS ---
def test_no_reflection_gives_zero_beta():
    scat = ScatteringData.reflectionless([])
    _, pcs = _pcs(scat, -2.0, 50.0)
    for pc in pcs:
        assert pc.nu == 0 and pc.beta12 == 0 and pc.beta21 == 0


def test_beta_modulus_identities(radiation):
    _, pcs = _pcs(radiation, -3.0, 100.0)
    for pc in pcs:
        expected = pc.nu * (1 - np.exp(-2 * np.pi * pc.nu)) / abs(pc.rho_z) ** 2
        assert abs(pc.beta12) ** 2 == pytest.approx(expected, rel=1e-9)
        gam2 = abs(complex_gamma(1j * pc.nu)) ** 2
        product = 2 * np.pi * np.exp(-np.pi * pc.nu) * abs(1 - pc.rho * pc.rho_tilde) / (abs(pc.rho_z) ** 2 * gam2)
        assert abs(pc.beta12 * pc.beta21) == pytest.approx(product, rel=1e-10)


def test_literal_reading_changes_modulus(radiation):
    _, nu_read = _pcs(radiation, -3.0, 100.0)
    _, literal = _pcs(radiation, -3.0, 100.0, reading="literal")
    assert abs(abs(nu_read[0].beta12) - abs(literal[0].beta12)) > 1e-6


def test_beta_phase_under_time_scaling(radiation):
    xi, t = -1.0, 40.0
    saddle, a = _pcs(radiation, xi, t)
    _, b = _pcs(radiation, xi, 4 * t)
    for i, (p, q) in enumerate(zip(a, b)):
        th = complex(theta(saddle.zeta[i], xi * t, t))
        shift = np.angle(q.beta12 / p.beta12 * np.exp(-6j * th))
        sign = -1 if p.mirrored else 1
        expected = np.angle(np.exp(-1j * sign * p.nu * np.log(4)))
        assert abs(np.angle(np.exp(1j * (shift - expected)))) < 1e-9


# --- LOCAL MODEL, E1, f ---
def test_zero_beta_local_model_and_error_term(one_pole):
    saddle = stationary_points(-1.0)
    zeros = [PCCoefficients(i, saddle.zeta[i], saddle.sqrt_ddtheta[i], 0j, 0j, 0j, 0j, 0.0, 0j, 0j) for i in range(4)]
    outer = solve_outer(one_pole, 0.4, -0.1)
    assert np.array_equal(local_model(saddle, zeros, 0.3 + 0.2j, 10.0), np.eye(2))
    assert np.array_equal(error_term_E1(outer, saddle, zeros, 10.0), np.zeros((2, 2)))
    assert radiation_coefficient_f(outer, saddle, zeros) == 0


def test_local_model_structure(radiation):
    t = 100.0
    saddle, pcs = _pcs(radiation, 2.0, t)
    for pc in pcs:
        assert pc.m1[0, 0] == 0 and pc.m1[1, 1] == 0
    terms = [0.5 * t**-0.5 * pc.m1 / pc.sqrt_ddtheta for pc in pcs]
    bound = sum(np.max(np.abs(c)) for c in terms)
    for r in (1e2, 1e3):
        z = r * np.exp(0.3j)
        laurent = (local_model(saddle, pcs, z, t) - np.eye(2)) * z
        assert np.max(np.abs(laurent - sum(terms))) < 2 / r * bound


def test_error_term_traceless_and_empty_lambda_form(radiation):
    t = 200.0
    saddle, pcs = _pcs(radiation, -2.5, t)
    outer = solve_outer(ReflectionlessData(pairs=[]), -2.5 * t, t)
    e1 = error_term_E1(outer, saddle, pcs, t)
    assert abs(np.trace(e1)) < 1e-14
    expected = 0j
    for pc in pcs:
        m = np.array([[1, 1j / pc.zeta], [1j / pc.zeta, 1]])
        det = 1 + pc.zeta**-2
        conj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det
        expected += t**-0.5 / (2j * pc.sqrt_ddtheta) * (m @ pc.m1 @ conj)[0, 1]
    assert abs(e1[0, 1] - expected) < 1e-14


def test_empty_lambda_f_closed_form(radiation):
    t = 300.0
    saddle, pcs = _pcs(radiation, 1.0, t)
    outer = solve_outer(ReflectionlessData(pairs=[]), 1.0 * t, t)
    closed = sum((pc.beta12 - pc.zeta**-2 * pc.beta21) / (2 * pc.sqrt_ddtheta) for pc in pcs)
    assert abs(radiation_coefficient_f(outer, saddle, pcs) - closed) < 1e-13


def test_dual_path_ratio_is_constant(radiation, one_pole, rng):
    outer = solve_outer(one_pole, 0.4, -0.1)
    for _ in range(20):
        xi, t = rng.uniform(-5, 5), rng.uniform(10, 1000)
        _, pcs = _pcs(radiation, xi, t)
        for row in dual_path_ratios(outer, pcs, t):
            assert abs(row["ratio_times_det"] + 1) < 1e-9


def test_branch_flip_leaves_f_unchanged(radiation):
    t = 150.0
    saddle, pcs = _pcs(radiation, 0.5, t)
    flipped_saddle = replace(saddle, sqrt_ddtheta=-saddle.sqrt_ddtheta)
    _, flipped = _pcs(radiation, 0.5, t, saddle=flipped_saddle)
    outer = solve_outer(ReflectionlessData(pairs=[]), 0.5 * t, t)
    f = radiation_coefficient_f(outer, saddle, pcs)
    g = radiation_coefficient_f(outer, flipped_saddle, flipped)
    assert abs(f - g) < 1e-12


@pytest.mark.parametrize("xi", [-4.5, -1.0, 2.5])
def test_saddle_summands_pair_into_conjugates(radiation, xi):
    t = 250.0
    _, pcs = _pcs(radiation, xi, t)
    assert [pc.mirrored for pc in pcs] == [False, True, True, False]
    terms = radiation_terms(solve_outer(ReflectionlessData(pairs=[]), xi * t, t), pcs)
    scale = np.max(np.abs(terms))
    assert abs(terms[1] - np.conj(terms[0])) < 1e-10 * scale
    assert abs(terms[2] - np.conj(terms[3])) < 1e-10 * scale
    assert abs(np.sum(terms).imag) < 1e-10 * scale


# --- ASSEMBLY ---
def test_reflectionless_input_returns_q_sol():
    result = q_asymptotic(-30.0, 10.0, ScatteringData.reflectionless([]))
    assert result.f == 0
    assert result.q_asym == result.q_sol_term == 1.0
    assert result.error_order == "O(t^-1)"


def test_time_gate_and_region():
    scat = ScatteringData.reflectionless([])
    with pytest.raises(RegionError):
        q_asymptotic(0.0, 5.0, scat)
    with pytest.raises(RegionError):
        q_asymptotic(700.0, 100.0, scat)


def test_empty_lambda_with_radiation(radiation):
    t = 1000.0
    result = q_asymptotic(-2.0 * t, t, radiation)
    assert result.active_poles == 0
    assert result.q_asym == pytest.approx(1.0 - t**-0.5 * result.f.real, abs=1e-15)
    assert abs(result.q_asym_imag) == pytest.approx(t**-0.5 * abs(result.f.imag), abs=1e-15)


@pytest.mark.parametrize("xi", [-4.0, -2.0, 0.0, 2.0, 4.0])
def test_ray_envelope_decays_as_inverse_square_root(radiation, xi):
    engine = AsymptoticEngine(radiation)
    rows = engine.ray(xi, [1e2, 3e2, 1e3, 3e3, 1e4])
    slope, _ = decay_fit([(r.t, r.envelope) for r in rows])
    assert slope == pytest.approx(-0.5, abs=1e-6)
    for r in rows:
        assert abs(abs(r.q_asym - r.c * r.q_sol_term) - r.t**-0.5 * abs(r.f)) < 1e-14
        assert abs(r.q_asym_imag) < IMAG_TOL


def test_radiation_gives_real_q_asym(radiation):
    engine = AsymptoticEngine(radiation)
    for xi in (-5.0, -3.0, -0.5, 1.5, 5.0):
        for r in engine.ray(xi, [1e2, 1e4]):
            assert abs(r.f.imag) < 1e-10 * max(abs(r.f), 1e-12)
            assert abs(r.q_asym_imag) < IMAG_TOL


def test_unsymmetric_reflection_raises_reality_error():
    # rotating rho by -i breaks rho(-conj z) = conj rho(z) and makes f imaginary
    scat = ScatteringData.from_functions(
        lambda z: -1j * fixtures.radiation_rho(z),
        lambda z: 1j * fixtures.radiation_rho_tilde(z),
    )
    with pytest.raises(RealityError):
        q_asymptotic(-200.0, 100.0, scat)


def test_mixed_data_keeps_active_solitons_real():
    xi = -3.0
    engine = AsymptoticEngine(fixtures.mixed_scattering(xi))
    for t in (100.0, 400.0):
        r = engine.evaluate(xi * t, t)
        assert r.active_poles > 0
        assert abs(r.q_asym_imag) < IMAG_TOL
        assert abs(abs(r.q_asym - r.q_sol_term) - abs(r.f) * t**-0.5) < 1e-12


@pytest.mark.parametrize("xi", [-3.5, 0.7, 4.2])
def test_q_asym_is_continuous_in_xi(radiation, xi):
    t = 200.0
    engine = AsymptoticEngine(radiation)
    here = engine.evaluate(xi * t, t).q_asym
    for step in (1e-9, -1e-9):
        near = engine.evaluate((xi + step) * t, t).q_asym
        assert abs(near - here) < 1e-8


def test_engine_caches_per_ray(radiation):
    engine = AsymptoticEngine(radiation)
    engine.evaluate(-100.0, 100.0)
    engine.evaluate(-200.0, 200.0)
    assert len(engine._transmissions) == 1
    assert len(engine._pcs) == 2
