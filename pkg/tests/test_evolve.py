import math
import numpy as np
import pytest
from hypothesis import given, strategies as st
from boundary_wave_lab.assembly import build_system
from boundary_wave_lab.errors import InvalidArgumentError
from boundary_wave_lab.evolve import (
    EnergyTrace, assert_fit_window, bump_state, default_fit_window, fit_decay, semigroup_resolvent_norm,
    simulate, smooth_data, step_midpoint, time_grid)
from boundary_wave_lab.geometry import build_annulus_mesh
from boundary_wave_lab.operator import State, apply_generator, energy_norm, resolve
from oracles import dense_generator, to_vector


def _smooth_bump(system):
    initial, _ = smooth_data(system, bump_state(system.mesh, (1.5, 0.0), 0.25), 2)
    return initial


def test_step_matches_dense_cayley_transform(small_system):
    state = State.random(small_system.size, np.random.default_rng(0))
    generator = dense_generator(small_system)
    identity = np.eye(len(generator))
    dt = 0.1

    following = step_midpoint(small_system, state, dt)

    expected = np.linalg.solve(identity + 0.5 * dt * generator, (identity - 0.5 * dt * generator) @ to_vector(state))
    np.testing.assert_allclose(to_vector(following), expected, rtol=1e-9, atol=1e-11)


def test_step_has_third_order_local_error(small_system):
    state = _smooth_bump(small_system)
    steps = (0.02, 0.01, 0.005)

    gaps = []
    for dt in steps:
        halves = step_midpoint(small_system, step_midpoint(small_system, state, 0.5 * dt), 0.5 * dt)
        gaps.append(energy_norm(small_system, step_midpoint(small_system, state, dt) - halves))

    scaled = [gap / dt ** 3 for gap, dt in zip(gaps, steps)]
    assert all(6.0 <= coarse / fine <= 10.0 for coarse, fine in zip(gaps, gaps[1:]))
    assert max(scaled) <= 1.5 * min(scaled)


def test_step_of_zero_is_zero(small_system):
    following = step_midpoint(small_system, State.zeros(small_system.size), 0.1)

    assert energy_norm(small_system, following) == 0.0


def test_undamped_step_is_an_isometry(undamped_system):
    state = State.random(undamped_system.size, np.random.default_rng(4))

    following = step_midpoint(undamped_system, state, 0.2)

    assert energy_norm(undamped_system, following) == pytest.approx(energy_norm(undamped_system, state), rel=1e-10)


@pytest.mark.parametrize('alpha', [0.5, 1.0, 2.0])
def test_simulation_contracts_and_balances(small_mesh, alpha):
    system = build_system(small_mesh, alpha)

    trace = simulate(system, _smooth_bump(system), 10.0)

    initial = trace.energies[0]
    assert np.all(np.diff(trace.energies) <= 1e-10 * initial)
    assert trace.max_balance_defect <= 1e-8 * initial
    assert trace.cumulative_dissipation() == pytest.approx(initial - trace.energies[-1], abs=1e-8 * initial)


@pytest.mark.slow
@pytest.mark.parametrize('alpha', [0.5, 1.0, 2.0])
def test_contraction_on_default_mesh(default_mesh, alpha):
    system = build_system(default_mesh, alpha)

    trace = simulate(system, _smooth_bump(system), 50.0)

    initial = trace.energies[0]
    assert np.all(np.diff(trace.energies) <= 1e-10 * initial)
    assert trace.cumulative_dissipation() == pytest.approx(initial - trace.energies[-1], abs=1e-8 * initial)


def test_undamped_simulation_conserves_energy(undamped_system):
    initial = State.random(undamped_system.size, np.random.default_rng(9))

    trace = simulate(undamped_system, initial, 50.0)

    assert abs(trace.energies[-1] - trace.energies[0]) <= 1e-9 * trace.energies[0]
    assert np.all(trace.dissipation == 0.0)


def test_simulation_rejects_bad_horizon(small_system):
    with pytest.raises(InvalidArgumentError):
        simulate(small_system, State.zeros(small_system.size), 0.0)


def test_smooth_data_inverts_the_shifted_generator(small_system):
    data = State.random(small_system.size, np.random.default_rng(1))

    smoothed, norm = smooth_data(small_system, data, 1)

    recovered = apply_generator(small_system, smoothed) + smoothed
    assert energy_norm(small_system, recovered - data) <= 1e-9 * energy_norm(small_system, data)
    assert energy_norm(small_system, smoothed) <= energy_norm(small_system, data)
    assert norm > 0


def test_smooth_data_of_zero(small_system):
    smoothed, norm = smooth_data(small_system, State.zeros(small_system.size), 2)

    assert norm == 0.0
    assert energy_norm(small_system, smoothed) == 0.0


def test_smooth_data_order_two_is_two_resolves(small_system):
    data = State.random(small_system.size, np.random.default_rng(2))

    smoothed, _ = smooth_data(small_system, data, 2)

    expected = resolve(small_system, 1.0, resolve(small_system, 1.0, data).state).state
    np.testing.assert_allclose(to_vector(smoothed), to_vector(expected))


def _power_law_trace(exponent, constant=2.0):
    times = np.linspace(0.0, 100.0, 1001)
    energies = np.empty_like(times)
    energies[0] = constant
    energies[1:] = constant * times[1:] ** exponent
    return EnergyTrace(times, energies, np.zeros_like(times), 1.0)


@given(exponent=st.floats(min_value=-3.0, max_value=0.0))
def test_fit_recovers_power_laws(exponent):
    fit = fit_decay(_power_law_trace(exponent), (10.0, 100.0))

    assert fit.exponent == pytest.approx(exponent, abs=1e-9)
    assert fit.constant == pytest.approx(2.0, rel=1e-8)


def test_fit_of_inverse_time_energy():
    fit = fit_decay(_power_law_trace(-1.0), (10.0, 100.0))

    assert fit.exponent == pytest.approx(-1.0, abs=0.01)
    assert fit.sup_t_energy == pytest.approx(2.0)


@pytest.mark.parametrize('window', [(10.0, 10.5), (50.0, 10.0), (10.0, 200.0)])
def test_fit_rejects_unusable_windows(window):
    with pytest.raises(InvalidArgumentError):
        fit_decay(_power_law_trace(-1.0), window)


def test_default_windows():
    assert default_fit_window(1.0, 2.0, 50.0) == (5.0, 50.0)
    assert default_fit_window(1.0, 2.0, 4.0) == (2.0, 4.0)


def test_semigroup_norm_is_nonincreasing(small_system):
    norms = [semigroup_resolvent_norm(small_system, time, dt=0.1, tolerance=1e-4).norm for time in (0.0, 1.0, 3.0)]

    assert norms[0] <= 1.0 + 1e-9
    assert norms[1] <= norms[0] * (1 + 1e-3)
    assert norms[2] <= norms[1] * (1 + 1e-3)


def _decay_sup(n_r, n_theta):
    system = build_system(build_annulus_mesh(1.0, 2.0, n_r, n_theta), 1.0)
    initial, _ = smooth_data(system, bump_state(system.mesh, (1.5, 0.0), 0.25), 2)
    trace = simulate(system, initial, 20.0)
    return fit_decay(trace, (5.0, 20.0))


@pytest.mark.slow
def test_decay_bound_is_stable_under_refinement():
    coarse = _decay_sup(8, 32)
    fine = _decay_sup(16, 64)

    assert math.isfinite(coarse.sup_t_energy) and math.isfinite(fine.sup_t_energy)
    assert fine.sup_t_energy == pytest.approx(coarse.sup_t_energy, rel=0.25)


def test_time_grid_covers_the_horizon():
    times = time_grid(4.0, 0.5)

    assert len(times) == 9
    assert times[-1] == pytest.approx(4.0)


@pytest.mark.parametrize('dt, window', [(0.5, (2.0, 4.0)), (0.1, (3.9, 4.0)), (0.1, (1.0, 4.5)), (0.1, (3.0, 2.0))])
def test_fit_window_is_checked_before_a_run(dt, window):
    with pytest.raises(InvalidArgumentError):
        assert_fit_window(4.0, dt, window)


def test_fit_window_with_enough_samples_is_accepted():
    assert_fit_window(4.0, 0.2, (2.0, 4.0))
