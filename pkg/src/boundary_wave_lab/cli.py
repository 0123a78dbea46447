"""
Command-line front end: one experiment per invocation, each writing its artifact with a
meta sidecar.

    boundary-wave-lab simulate --nr 8 --ntheta 32 --alpha 1 --T 50 --trace-out trace.csv
"""

import logging
import sys
from collections import OrderedDict
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from . import __version__
from ._exceptions import LabError
from ._str_enum import StrEnum
from .argument import Argument
from .argument_parse_error import ArgumentParseError
from .arguments import Arguments
from .artifacts import (
    write_matrices, write_mesh, write_meta, write_report, write_samples, write_spectrum, write_state,
    write_sweep, write_trace)
from .assembly import AssembledSystem, build_system
from .errors import ArtifactError, InvalidArgumentError
from .evolve import (
    assert_fit_window, bump_state, default_fit_window, default_time_step, fit_decay, simulate, smooth_data)
from .geometry import LevelSetDomain, Mesh, build_annulus_mesh, build_levelset_mesh
from .multiplier import VectorField, check_hypotheses, levelset_field, radial_field, rotation_field
from .operator import State
from .spectral import quadratic_eigs, resolvent_sweep

logger = logging.getLogger(__name__)

_LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'


class Command(StrEnum):
    mesh = 'mesh'
    simulate = 'simulate'
    spectrum = 'spectrum'
    sweep = 'sweep'
    check_h = 'check-h'


class InitialData(StrEnum):
    bump = 'bump'
    random = 'random'


class FieldKind(StrEnum):
    radial = 'radial'
    rotation = 'rotation'
    levelset = 'levelset'


class RunConfig(Arguments):
    """
    Every parameter of a lab run.
    """

    def __init__(self) -> None:
        super().__init__()
        self._command = None
        self._r0 = 1.0
        self._r1 = 2.0
        self._n_r = 8
        self._n_theta = 32
        self._aspect = 1.0
        self._alpha = 1.0
        self._undamped = False
        self._horizon = 50.0
        self._dt = None
        self._smooth_k = 2
        self._initial = InitialData.bump.value
        self._fit_lo = None
        self._fit_hi = None
        self._omega_min = 1.0
        self._omega_max = 20.0
        self._samples = 60
        self._jobs = 1
        self._count = 40
        self._shift_re = 0.0
        self._shift_im = 5.0
        self._field = FieldKind.radial.value
        self._fd_step = 1e-6
        self._seed = 0
        self._log_level = 'WARNING'
        self._mesh_out = 'mesh.txt'
        self._trace_out = 'trace.csv'
        self._state_out = None
        self._sweep_out = 'sweep.csv'
        self._spectrum_out = 'spectrum.csv'
        self._report_out = 'report.txt'
        self._samples_out = None
        self._dump_matrices = None

    @Argument(help='The experiment to run.', choices=Command.values(), positional=True)
    def command(self) -> str:
        return self._command

    @Argument(help='Inner radius (Γ0 level).')
    def r0(self) -> float:
        return self._r0

    @Argument(help='Outer radius (Γ1 level).')
    def r1(self) -> float:
        return self._r1

    @Argument(help='Number of rings, >= 2.', flag='--nr')
    def n_r(self) -> int:
        return self._n_r

    @Argument(help='Number of sectors, >= 8.', flag='--ntheta')
    def n_theta(self) -> int:
        return self._n_theta

    @Argument(help='x semi-axis over y semi-axis; 1 meshes the exact annulus, otherwise the elliptic ring.')
    def aspect(self) -> float:
        return self._aspect

    @Argument(help='Feedback gain of the Robin condition on Γ1.')
    def alpha(self) -> float:
        return self._alpha

    @Argument(help='Accept alpha = 0, the conservative reference system.')
    def undamped(self) -> bool:
        return self._undamped

    @Argument(help='Simulation horizon.', flag='--T', metavar='T')
    def horizon(self) -> float:
        return self._horizon

    @Argument(help='Time step; h_min / 2 when omitted.')
    def dt(self) -> Optional[float]:
        return self._dt

    @Argument(help='Smoothing order k of X0 = (A + I)^-k Y.', flag='--smooth-k')
    def smooth_k(self) -> int:
        return self._smooth_k

    @Argument(help='Initial datum Y before smoothing.', choices=InitialData.values())
    def initial(self) -> str:
        return self._initial

    @Argument(help='Start of the decay fit window; min(5 (r1 - r0), T/2) when omitted.')
    def fit_lo(self) -> Optional[float]:
        return self._fit_lo

    @Argument(help='End of the decay fit window; T when omitted.')
    def fit_hi(self) -> Optional[float]:
        return self._fit_hi

    @Argument(help='Lowest sweep frequency, >= 1.')
    def omega_min(self) -> float:
        return self._omega_min

    @Argument(help='Highest sweep frequency; clamped to 1/h_min.')
    def omega_max(self) -> float:
        return self._omega_max

    @Argument(help='Number of log-spaced sweep frequencies, >= 8.')
    def samples(self) -> int:
        return self._samples

    @Argument(help='Concurrent sweep samples.')
    def jobs(self) -> int:
        return self._jobs

    @Argument(help='Number of eigenvalues.')
    def count(self) -> int:
        return self._count

    @Argument(help='Real part of the eigenvalue shift.')
    def shift_re(self) -> float:
        return self._shift_re

    @Argument(help='Imaginary part of the eigenvalue shift.')
    def shift_im(self) -> float:
        return self._shift_im

    @Argument(help='Multiplier vector field to check.', choices=FieldKind.values())
    def field(self) -> str:
        return self._field

    @Argument(help='Finite-difference step of fields without an analytic Jacobian.')
    def fd_step(self) -> float:
        return self._fd_step

    @Argument(help='Seed of every random input.')
    def seed(self) -> int:
        return self._seed

    @Argument(help='Logging threshold.', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    def log_level(self) -> str:
        return self._log_level

    @Argument(help='Mesh export of the mesh command.', metavar='path')
    def mesh_out(self) -> str:
        return self._mesh_out

    @Argument(help='Energy trace CSV of the simulate command.', metavar='path')
    def trace_out(self) -> str:
        return self._trace_out

    @Argument(help='CSV of the smoothed initial state of the simulate command.', metavar='path')
    def state_out(self) -> Optional[str]:
        return self._state_out

    @Argument(help='Resolvent sweep CSV.', metavar='path')
    def sweep_out(self) -> str:
        return self._sweep_out

    @Argument(help='Eigenvalue CSV.', metavar='path')
    def spectrum_out(self) -> str:
        return self._spectrum_out

    @Argument(help='key=value report of the check-h command.', metavar='path')
    def report_out(self) -> str:
        return self._report_out

    @Argument(help='Per-sample CSV of the check-h command.', metavar='path')
    def samples_out(self) -> Optional[str]:
        return self._samples_out

    @Argument(help='Directory receiving every assembled matrix in coordinate format.', metavar='dir')
    def dump_matrices(self) -> Optional[str]:
        return self._dump_matrices

    @property
    def shift(self) -> complex:
        return complex(self._shift_re, self._shift_im)

    @property
    def fit_window(self) -> Sequence[float]:
        """
        Gets the decay fit window with its defaults filled in.
        """
        low, high = default_fit_window(self._r0, self._r1, self._horizon)
        window = (low if self._fit_lo is None else self._fit_lo,
                  high if self._fit_hi is None else self._fit_hi)
        return window

    def validate(self) -> None:
        """
        Checks the parameters against the preconditions of the command.

        Raises:
            ArgumentParseError:
                One or more parameters are invalid; the message lists all of them.
        """
        errors: List[str] = []

        def check(condition: bool, message: str) -> None:
            if not condition:
                errors.append(message)

        check(self._command is not None, 'a command is required')
        check(self._r0 > 0, f'--r0 must be positive, got {self._r0}')
        check(self._r1 > self._r0, f'--r1 must exceed --r0, got r0={self._r0} r1={self._r1}')
        check(self._n_r >= 2, f'--nr must be at least 2, got {self._n_r}')
        check(self._n_theta >= 8, f'--ntheta must be at least 8, got {self._n_theta}')
        check(self._aspect > 0, f'--aspect must be positive, got {self._aspect}')
        check(self._seed >= 0, f'--seed must be non-negative, got {self._seed}')
        command = self._command
        if command in (Command.simulate, Command.spectrum, Command.sweep):
            if self._undamped:
                check(self._alpha >= 0, f'--alpha must be non-negative, got {self._alpha}')
            else:
                check(self._alpha > 0, f'--alpha must be positive (or pass --undamped), got {self._alpha}')
        if command == Command.simulate:
            check(self._horizon > 0, f'--T must be positive, got {self._horizon}')
            check(self._dt is None or self._dt > 0, f'--dt must be positive, got {self._dt}')
            check(self._smooth_k >= 1, f'--smooth-k must be at least 1, got {self._smooth_k}')
            low, high = self.fit_window
            check(0 <= low < high <= self._horizon,
                  f'the fit window [{low}, {high}] must satisfy 0 <= fit-lo < fit-hi <= T')
            if self._dt is not None and self._dt > 0 and 0 <= low < high <= self._horizon:
                try:
                    assert_fit_window(self._horizon, self._dt, (low, high))
                except InvalidArgumentError as error:
                    errors.append(error.message)
        if command == Command.sweep:
            check(self._omega_min >= 1, f'--omega-min must be at least 1, got {self._omega_min}')
            check(self._omega_max > self._omega_min, f'--omega-max must exceed --omega-min, got {self._omega_max}')
            check(self._samples >= 8, f'--samples must be at least 8, got {self._samples}')
            check(self._jobs >= 1, f'--jobs must be at least 1, got {self._jobs}')
        if command == Command.spectrum:
            check(self._count >= 1, f'--count must be at least 1, got {self._count}')
        if command == Command.check_h:
            check(self._fd_step > 0, f'--fd-step must be positive, got {self._fd_step}')
        if errors:
            raise ArgumentParseError('; '.join(errors))


def _build_mesh(config: RunConfig) -> Mesh:
    if config.aspect == 1.0:
        return build_annulus_mesh(config.r0, config.r1, config.n_r, config.n_theta)
    domain = LevelSetDomain.ellipse(config.r0, config.r1, config.aspect)
    return build_levelset_mesh(domain, config.n_r, config.n_theta)


def _build_system(
        config: RunConfig,
        mesh: Mesh
        ) -> AssembledSystem:
    system = build_system(mesh, config.alpha, allow_undamped=config.undamped)
    if config.dump_matrices is not None:
        directory = write_matrices(system, config.dump_matrices)
        summary = OrderedDict([('nodes', mesh.node_count), ('matrices', len(system.matrices()))])
        write_meta(directory / 'matrices', config.resolved(), __version__, summary)
    return system


def _initial_data(
        config: RunConfig,
        mesh: Mesh
        ) -> State:
    if config.initial == InitialData.random:
        return State.random(mesh.node_count, np.random.default_rng(config.seed))
    center = (0.5 * config.aspect * (config.r0 + config.r1), 0.0)
    return bump_state(mesh, center, 0.25 * (config.r1 - config.r0))


def _summarize(
        command: Command,
        summary: Dict[str, object]
        ) -> None:
    text = ' '.join(f'{key}={value:.6g}' if isinstance(value, float) else f'{key}={value}'
                    for key, value in summary.items())
    print(f'{command}: {text}', file=sys.stderr)


def _run_mesh(config: RunConfig) -> Dict[str, object]:
    mesh = _build_mesh(config)
    write_mesh(mesh, config.mesh_out)
    summary = OrderedDict([
        ('nodes', mesh.node_count), ('triangles', mesh.triangle_count),
        ('h_min', mesh.h_min), ('h_max', mesh.h_max)])
    write_meta(config.mesh_out, config.resolved(), __version__, summary)
    return summary


def _run_simulate(config: RunConfig) -> Dict[str, object]:
    mesh = _build_mesh(config)
    dt = default_time_step(mesh) if config.dt is None else config.dt
    assert_fit_window(config.horizon, dt, config.fit_window)
    system = _build_system(config, mesh)
    initial, graph_norm0 = smooth_data(system, _initial_data(config, mesh), config.smooth_k)
    trace = simulate(system, initial, config.horizon, dt)
    fit = fit_decay(trace, config.fit_window)
    summary = OrderedDict([
        ('steps', len(trace.times) - 1), ('time_step', dt), ('E0', float(trace.energies[0])),
        ('ET', float(trace.energies[-1])), ('graph_norm0', graph_norm0), ('exponent', fit.exponent),
        ('constant', fit.constant), ('sup_tE', fit.sup_t_energy), ('fit_lo', fit.window[0]),
        ('fit_hi', fit.window[1]), ('max_balance_defect', trace.max_balance_defect)])
    if config.state_out is not None:
        write_state(initial, config.state_out)
        write_meta(config.state_out, config.resolved(), __version__, summary)
    write_trace(trace, config.trace_out)
    write_meta(config.trace_out, config.resolved(), __version__, summary)
    return summary


def _run_spectrum(config: RunConfig) -> Dict[str, object]:
    system = _build_system(config, _build_mesh(config))
    spectrum = quadratic_eigs(system, config.count, config.shift)
    write_spectrum(spectrum, config.spectrum_out)
    summary = OrderedDict([
        ('count', len(spectrum.eigenvalues)), ('method', spectrum.method),
        ('min_re_mu', spectrum.min_real_part), ('max_residual', float(spectrum.residuals.max()))])
    write_meta(config.spectrum_out, config.resolved(), __version__, summary)
    return summary


def _run_sweep(config: RunConfig) -> Dict[str, object]:
    system = _build_system(config, _build_mesh(config))
    sweep = resolvent_sweep(system, config.omega_min, config.omega_max, config.samples, config.jobs, config.seed)
    write_sweep(sweep, config.sweep_out)
    summary = OrderedDict([
        ('samples', len(sweep.samples)), ('omega_max', sweep.omega_max), ('slope', sweep.slope),
        ('sup_scaled', sweep.sup_scaled), ('peaks', len(sweep.peaks))])
    write_meta(config.sweep_out, config.resolved(), __version__, summary)
    return summary


def _field(config: RunConfig) -> VectorField:
    if config.field == FieldKind.rotation:
        return rotation_field()
    if config.field == FieldKind.levelset:
        return levelset_field(LevelSetDomain.ellipse(config.r0, config.r1, config.aspect), config.fd_step)
    return radial_field()


def _run_check_h(config: RunConfig) -> Dict[str, object]:
    mesh = _build_mesh(config)
    report = check_hypotheses(_field(config), mesh)
    summary = OrderedDict([
        ('rho', report.rho), ('gamma0_parallel_residual', report.gamma0_parallel_residual),
        ('gamma0_max_hnu', report.gamma0_max_hnu), ('m', report.m),
        ('verdict', 'pass' if report.passed else 'fail')])
    write_report(report, config.report_out)
    write_meta(config.report_out, config.resolved(), __version__, summary)
    if config.samples_out is not None:
        write_samples(report, config.samples_out)
        write_meta(config.samples_out, config.resolved(), __version__, summary)
    return summary


_COMMANDS: Dict[Command, Callable[[RunConfig], Dict[str, object]]] = {
    Command.mesh: _run_mesh,
    Command.simulate: _run_simulate,
    Command.spectrum: _run_spectrum,
    Command.sweep: _run_sweep,
    Command.check_h: _run_check_h,
}


def run(config: RunConfig) -> int:
    """
    Validates the configuration and runs its command.

    Returns:
        0 on success, 1 when the computation failed, 2 when the configuration is invalid.
    """
    try:
        config.validate()
        command = Command.from_value(config.command)
        try:
            summary = _COMMANDS[command](config)
        except OSError as error:
            raise ArtifactError(f'could not write the artifacts of {command}', error) from error
    except LabError as error:
        print(error.flatten(), file=sys.stderr)
        logger.debug(error.traceback)
        return error.exit_status
    _summarize(command, summary)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = RunConfig.parse(argv)
    except ArgumentParseError as error:
        print(error.flatten(), file=sys.stderr)
        return error.exit_status
    logging.basicConfig(level=config.log_level, stream=sys.stderr, format=_LOG_FORMAT)
    status = run(config)
    return status


if __name__ == '__main__':
    sys.exit(main())
