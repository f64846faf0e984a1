import numpy as np
import pytest

from nmkdv import fixtures
from nmkdv.errors import DomainError, SingularSystemError
from nmkdv.phase import growing_poles, soliton_activity, soliton_velocity, stationary_points, theta
from nmkdv.scattering import BoundaryData, ScatteringData, partial_transmission
from nmkdv.soliton import (
    ReflectionlessData,
    admissible_data,
    admissible_orbit,
    breather_seed,
    modify_for_lambda,
    phase_factors,
    q_sol,
    solve_outer,
)
from nmkdv.utils import SIGMA1
from nmkdv.verify import pde_residual


def _sample_z(rng, data, n):
    avoid = data.eta + [-1 / e for e in data.eta]
    out = []
    while len(out) < n:
        z = rng.uniform(0.3, 3) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        if abs(abs(z) - 1) > 1e-3 and all(abs(z - a) > 0.1 for a in avoid):
            out.append(z)
    return out


def test_empty_data_gives_background():
    data = ReflectionlessData(pairs=[])
    outer = solve_outer(data, 1.3, 0.4)
    z = 0.7 + 0.2j
    assert np.allclose(outer.evaluate(z), np.eye(2) + 1j * SIGMA1 / z)
    assert q_sol(data, 1.3, 0.4) == 1.0


def test_pole_validation():
    with pytest.raises(DomainError):
        ReflectionlessData(pairs=[(np.exp(0.3j), 1.0)])
    with pytest.raises(DomainError):
        ReflectionlessData(pairs=[(2j, 1.0), (2j, 0.5)])
    with pytest.raises(DomainError):
        ReflectionlessData(pairs=[(1j, 1.0)])


def test_orbit_of_imaginary_seed():
    orbit = admissible_orbit(1.5j, sign=1)
    assert len(orbit) == 2
    assert orbit[0] == (1.5j, 1)
    assert abs(orbit[1][0] + 1j / 1.5) < 1e-15 and orbit[1][1] == -1
    assert len(admissible_orbit(1.5 * np.exp(0.6j))) == 4
    with pytest.raises(DomainError):
        admissible_orbit(0.5j)


@pytest.mark.parametrize("builder", [fixtures.one_pole, fixtures.two_pole, fixtures.three_pole])
def test_outer_determinant(builder, rng):
    data = builder()
    outer = solve_outer(data, 0.4, -0.1)
    for z in _sample_z(rng, data, 100):
        assert abs(np.linalg.det(outer.evaluate(z)) - (1 + z**-2)) < 1e-9 * max(1.0, abs(1 + z**-2))


def test_outer_structure_at_branch_points(one_pole):
    outer = solve_outer(one_pole, -0.3, 0.2)
    for s in (1, -1):
        m = outer.evaluate(s * 1j)
        assert np.max(np.abs(m[:, 1] - s * m[:, 0])) < 1e-9
    z = 1e-9 * np.exp(0.4j)
    assert np.max(np.abs(z * outer.evaluate(z) - 1j * SIGMA1)) < 1e-8


@pytest.mark.parametrize("q_minus, delta", [(1.0, 1), (-1.0, 1), (1.0, -1)])
def test_branch_point_factor_follows_q_minus(q_minus, delta):
    # col2 = +-q_- col1 at z = +-i whatever sigma is
    pairs = admissible_data([1.3j], q_minus=q_minus).pairs
    data = ReflectionlessData(pairs=pairs, boundary=BoundaryData.from_minus(q_minus, delta))
    outer = solve_outer(data, 0.2, 0.1)
    for s in (1, -1):
        m = outer.evaluate(s * 1j)
        assert np.max(np.abs(m[:, 1] - s * q_minus * m[:, 0])) < 1e-9


def test_reality_and_pt_symmetry():
    data = fixtures.two_pole()
    for x, t in [(0.3, 0.1), (-1.2, 0.4), (2.5, -0.3)]:
        outer = solve_outer(data, x, t)
        assert abs(outer.q_complex.imag) < 1e-9
        assert q_sol(data, -x, -t) == pytest.approx(q_sol(data, x, t), abs=1e-9)


def test_reordering_invariance():
    data = fixtures.three_pole()
    flipped = ReflectionlessData(pairs=list(reversed(data.pairs)), boundary=data.boundary)
    assert q_sol(flipped, 0.7, 0.2) == pytest.approx(q_sol(data, 0.7, 0.2), abs=1e-10)


def test_phases_advance_analytically():
    data = fixtures.two_pole()
    x, t, dt = 0.5, 0.1, 0.35
    advanced = phase_factors(data, x, t) * np.exp(-2j * theta(np.array(data.eta), 0.0, dt))
    fresh = solve_outer(data, x, t + dt)
    shifted = solve_outer(data, x, t + dt, phases=advanced)
    assert abs(fresh.q_complex - shifted.q_complex) < 1e-10


def test_singular_system_reports_pair():
    # for a single pole the system determinant is 1 + c^2/(eta^2 + 1)^2
    eta = 2j
    data = ReflectionlessData(pairs=[(eta, 1j * (eta**2 + 1))])
    with pytest.raises(SingularSystemError) as err:
        solve_outer(data, 0.0, 0.0)
    assert err.value.worst_pair == (0, 0)


@pytest.mark.parametrize("builder", [fixtures.one_pole, fixtures.two_pole, fixtures.three_pole])
def test_soliton_satisfies_nonlocal_equation(builder):
    data = builder()
    report = pde_residual(lambda x, t: q_sol(data, x, t), -1, np.linspace(-4, 4, 40), np.linspace(-0.5, 0.5, 40))
    assert report.residual.shape == (40, 40)
    assert report.passed, report.summary()


def test_residual_tolerance_rejects_rescaled_soliton(one_pole):
    report = pde_residual(lambda x, t: 1.01 * q_sol(one_pole, x, t), -1, np.linspace(-2, 2, 9), np.linspace(-0.2, 0.2, 3))
    assert not report.passed


def test_residual_scales_quadratically(one_pole):
    q = lambda x, t: q_sol(one_pole, x, t)
    xs, ts = np.linspace(-2, 2, 9), np.linspace(-0.2, 0.2, 5)
    coarse = pde_residual(q, -1, xs, ts, 0.02, 0.02).max_residual
    fine = pde_residual(q, -1, xs, ts, 0.01, 0.01).max_residual
    assert coarse / fine == pytest.approx(4.0, rel=0.2)


def _shifted(data, group, other, xi):
    """One-soliton data for `group` with the phase shift left by the poles of `other` that grow on xi."""
    etas = [data.pairs[k][0] for k in other]
    growing = [etas[k] for k in growing_poles(etas, xi)]
    pairs = []
    for k in group:
        eta, c = data.pairs[k]
        T = np.prod([(eta + 1 / e) / (eta - e) for e in growing]) if growing else 1.0
        pairs.append((eta, c * T**-2))
    return ReflectionlessData(pairs=pairs, boundary=data.boundary)


def test_separated_solitons_superpose():
    data = admissible_data([1.6j, 2.2j], signs=[1, -1])
    a, b = [0, 1], [2, 3]
    v_a, v_b = soliton_velocity(1.6j), soliton_velocity(2.2j)
    t = 15.0 / abs(v_b - v_a)
    one_a = _shifted(data, a, b, v_a)
    one_b = _shifted(data, b, a, v_b)
    for x in np.linspace(min(v_a, v_b) * t - 10, max(v_a, v_b) * t + 10, 41):
        superposed = q_sol(one_a, x, t) + q_sol(one_b, x, t) - 1
        assert abs(q_sol(data, x, t) - superposed) < 1e-3


# --- LAMBDA RESTRICTION ---
def test_modify_keeps_constants_without_transmission():
    xi = -3.0
    data = fixtures.breather_poles(xi)
    scat = ScatteringData.reflectionless(data.pairs)
    tr = partial_transmission(scat, stationary_points(xi))
    reduced = modify_for_lambda(scat, tr, data.boundary)
    assert len(reduced) == 4
    assert np.allclose(reduced.c_hat, data.c_hat)


def test_modify_rescales_by_rational_factor():
    xi = -3.0
    seed, far = breather_seed(xi), 5 * np.exp(1j * np.pi / 4)
    scat = ScatteringData.reflectionless([(seed, 0.7), (far, 1.0)])
    tr = partial_transmission(scat, stationary_points(xi))
    reduced = modify_for_lambda(scat, tr, fixtures.BOUNDARY)
    assert reduced.eta == [seed]
    factor = ((seed + 1 / far) / (seed - far)) ** -2
    assert reduced.c_hat[0] == pytest.approx(0.7 * factor, rel=1e-12)


def test_empty_lambda_warns_for_delta_minus_one(caplog):
    scat = ScatteringData.reflectionless([])
    tr = partial_transmission(scat, stationary_points(0.0))
    reduced = modify_for_lambda(scat, tr, BoundaryData.from_minus(1.0, -1))
    assert len(reduced) == 0
    assert any("delta = -1" in rec.getMessage() for rec in caplog.records)


def test_breather_seed_is_active():
    seed = breather_seed(-3.0)
    assert abs(abs(seed.real) - abs(seed.imag)) < 1e-12
    assert soliton_activity([seed], -3.0, 1e-8) == [0]
