"""
Time integration of dX/dt + 𝒜X = 0 by the implicit midpoint (Cayley) scheme, energy
bookkeeping, smooth initial data and decay-rate fitting.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
from ._asserts import assert_at_least, assert_less, assert_non_negative, assert_positive
from .assembly import AssembledSystem
from .errors import InvalidArgumentError
from .geometry import Mesh
from .operator import (
    OperatorNorm, State, dissipation, energy_norm, energy_operator_norm, graph_norm, resolve,
    resolve_adjoint)

logger = logging.getLogger(__name__)

_MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class EnergyTrace:
    """
    Energy E = ½‖X‖² and boundary dissipation along a simulated trajectory.

    Remarks:
        dissipation[0] is the instantaneous rate at t = 0 and dissipation[k], k >= 1, the
        midpoint rate of the step ending at times[k], so that
        E[k-1] - E[k] = (times[k] - times[k-1]) dissipation[k] up to solver round-off.
    """
    times: np.ndarray
    energies: np.ndarray
    dissipation: np.ndarray
    graph_norm0: float
    max_balance_defect: float = 0.0

    def cumulative_dissipation(self) -> float:
        """
        Gets the energy dissipated over the whole trace.
        """
        steps = np.diff(self.times)
        total = float(np.sum(steps * self.dissipation[1:]))
        return total


@dataclass(frozen=True)
class DecayFit:
    """
    A power law C t^exponent fitted to the energy over a window.

    Remarks:
        sup_t_energy is the supremum of t E(t) / ‖X0‖²_graph over the window, the quantity
        a t⁻¹ energy decay bound keeps finite.
    """
    exponent: float
    constant: float
    window: Tuple[float, float]
    sup_t_energy: float
    residual: float
    samples: int


def default_time_step(mesh: Mesh) -> float:
    """
    Gets h_min / 2.
    """
    step = 0.5 * mesh.h_min
    return step


def default_fit_window(
        r0: float,
        r1: float,
        horizon: float
        ) -> Tuple[float, float]:
    """
    Gets [5 (r1 - r0), T]: the fit starts after five radial crossings, or at T/2 when
    the horizon is shorter than ten crossings.
    """
    window = (min(5.0 * (r1 - r0), 0.5 * horizon), float(horizon))
    return window


def time_grid(
        horizon: float,
        dt: float
        ) -> np.ndarray:
    """
    Gets the ceil(T / dt) + 1 sample times 0, dt, 2 dt, ... of a run over [0, T].
    """
    assert_positive(horizon, 'T')
    assert_positive(dt, 'dt')
    steps = int(math.ceil(horizon / dt - 1e-9))
    return dt * np.arange(steps + 1)


def assert_fit_window(
        horizon: float,
        dt: float,
        window: Tuple[float, float]
        ) -> None:
    """
    Checks, before a run, that the window lies in [0, T] and holds at least 10 sample times t > 0.

    Raises:
        InvalidArgumentError:
            The window is empty, outside [0, T] or too short for the time step.
    """
    low, high = window
    assert_less(low, high, 't_lo', 't_hi')
    assert_non_negative(low, 't_lo')
    times = time_grid(horizon, dt)
    if high > times[-1] * (1 + 1e-12):
        raise InvalidArgumentError(f'window [{low}, {high}] ends after the last sample time {times[-1]}.')
    samples = int(np.sum((times >= low) & (times <= high) & (times > 0)))
    if samples < _MIN_FIT_SAMPLES:
        raise InvalidArgumentError(
            f'window [{low}, {high}] holds {samples} sample times at dt={dt}, '
            f'at least {_MIN_FIT_SAMPLES} are needed.')


def bump_state(
        mesh: Mesh,
        center: Tuple[float, float],
        width: float
        ) -> State:
    """
    Gets the Gaussian displacement bump exp(-|x - c|² / width²) at rest.
    """
    assert_positive(width, 'width')
    offsets = mesh.nodes - np.asarray(center, dtype=float)[None, :]
    displacement = np.exp(-np.sum(offsets ** 2, axis=1) / width ** 2)
    state = State(displacement, np.zeros(mesh.node_count))
    return state


def step_midpoint(
        system: AssembledSystem,
        state: State,
        dt: float
        ) -> State:
    """
    Advances one implicit midpoint step X' = (I + dt/2 𝒜)⁻¹(I - dt/2 𝒜)X.

    Remarks:
        With λ = 2/dt the step equals 2λ(𝒜 + λ)⁻¹X - X, one resolve. The scheme is a
        contraction in the energy norm for α > 0 and an isometry for α = 0.
    """
    assert_positive(dt, 'dt')
    shift = 2.0 / dt
    solved = resolve(system, shift, state)
    following = 2.0 * shift * solved.state - state
    return following


def _step_adjoint(
        system: AssembledSystem,
        state: State,
        dt: float
        ) -> State:
    shift = 2.0 / dt
    solved = resolve_adjoint(system, shift, state)
    preceding = 2.0 * shift * solved.state - state
    return preceding


def simulate(
        system: AssembledSystem,
        initial: State,
        horizon: float,
        dt: Optional[float] = None,
        tolerance: float = 1e-8
        ) -> EnergyTrace:
    """
    Integrates the closed-loop system from the initial state over [0, horizon].

    Args:
        system:
            The assembled system.
        initial:
            The state at t = 0.
        horizon:
            Final time T > 0.
        dt:
            Time step; h_min / 2 when omitted.
        tolerance:
            Per-step energy balance defects above tolerance E0 are logged as warnings.

    Returns:
        The trace of ceil(T / dt) steps.
    """
    dt = default_time_step(system.mesh) if dt is None else dt
    times = time_grid(horizon, dt)
    steps = len(times) - 1
    energies = np.empty(steps + 1)
    rates = np.empty(steps + 1)
    energies[0] = 0.5 * energy_norm(system, initial) ** 2
    rates[0] = dissipation(system, initial)
    initial_energy = energies[0]
    max_defect = 0.0
    state = initial
    for step in range(1, steps + 1):
        following = step_midpoint(system, state, dt)
        rates[step] = dissipation(system, 0.5 * (state + following))
        energies[step] = 0.5 * energy_norm(system, following) ** 2
        defect = abs(energies[step] - energies[step - 1] + dt * rates[step])
        max_defect = max(max_defect, defect)
        if defect > tolerance * initial_energy:
            logger.warning('step %d: energy balance defect %.3e exceeds %.1e E0', step, defect, tolerance)
        state = following
    strict = int(np.sum(np.diff(energies) < 0))
    logger.info('simulated %d steps of dt=%.4g: E0=%.6e E(T)=%.6e, %d strictly decreasing steps',
                steps, dt, energies[0], energies[-1], strict)
    trace = EnergyTrace(times, energies, rates, graph_norm(system, initial), max_defect)
    return trace


def smooth_data(
        system: AssembledSystem,
        data: State,
        order: int = 2
        ) -> Tuple[State, float]:
    """
    Gets X0 = (𝒜 + I)^-order Y, an element of the domain of 𝒜, with its graph norm.
    """
    assert_at_least(order, 1, 'order')
    state = data
    for _ in range(int(order)):
        state = resolve(system, 1.0, state).state
    norm = graph_norm(system, state)
    return state, norm


def fit_decay(
        trace: EnergyTrace,
        window: Tuple[float, float]
        ) -> DecayFit:
    """
    Fits log E against log t by least squares over the window.

    Raises:
        InvalidArgumentError:
            The window is empty, outside the trace or holds fewer than 10 positive samples.
    """
    low, high = window
    assert_less(low, high, 't_lo', 't_hi')
    assert_non_negative(low, 't_lo')
    if high > trace.times[-1] * (1 + 1e-12) or low < trace.times[0]:
        raise InvalidArgumentError(
            f'window [{low}, {high}] is outside the trace range [{trace.times[0]}, {trace.times[-1]}].')
    mask = (trace.times >= low) & (trace.times <= high) & (trace.times > 0) & (trace.energies > 0)
    samples = int(mask.sum())
    if samples < _MIN_FIT_SAMPLES:
        raise InvalidArgumentError(
            f'window [{low}, {high}] holds {samples} positive samples, at least {_MIN_FIT_SAMPLES} are needed.')
    log_times = np.log(trace.times[mask])
    log_energies = np.log(trace.energies[mask])
    (slope, intercept), residuals, *_ = np.polyfit(log_times, log_energies, 1, full=True)
    residual = math.sqrt(float(residuals[0]) / samples) if len(residuals) else 0.0
    if trace.graph_norm0 > 0:
        sup_t_energy = float(np.max(trace.times[mask] * trace.energies[mask])) / trace.graph_norm0 ** 2
    else:
        sup_t_energy = math.inf
    fit = DecayFit(float(slope), math.exp(intercept), (float(low), float(high)), sup_t_energy, residual, samples)
    logger.info('decay fit on [%g, %g]: exponent %.3f, sup t E / |X0|^2 = %.4g', low, high, slope, sup_t_energy)
    return fit


def semigroup_resolvent_norm(
        system: AssembledSystem,
        time: float,
        dt: Optional[float] = None,
        seed: int = 0,
        tolerance: float = 1e-8,
        max_iterations: int = 2000
        ) -> OperatorNorm:
    """
    Estimates ‖S_t (𝒜 + I)⁻¹‖ in the energy operator norm, S_t the midpoint propagator.

    Remarks:
        Semi-uniform stability is the decay of this norm to zero; the discrete
        propagator is a contraction, so the norm is nonincreasing in t.
    """
    assert_non_negative(time, 'time')
    dt = default_time_step(system.mesh) if dt is None else dt
    assert_positive(dt, 'dt')
    steps = int(round(time / dt))

    def forward(state: State) -> State:
        state = resolve(system, 1.0, state).state
        for _ in range(steps):
            state = step_midpoint(system, state, dt)
        return state

    def backward(state: State) -> State:
        for _ in range(steps):
            state = _step_adjoint(system, state, dt)
        state = resolve_adjoint(system, 1.0, state).state
        return state

    estimate = energy_operator_norm(system, forward, backward, seed, tolerance, max_iterations)
    logger.info('|S_t (A + I)^-1| at t=%g: %.6g (%d iterations)', steps * dt, estimate.norm, estimate.iterations)
    return estimate
