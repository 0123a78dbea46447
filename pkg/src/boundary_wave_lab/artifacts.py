"""
Text and CSV artifacts of the lab commands, with their meta sidecars.

Floats are written with repr so that identical runs give byte-identical files.
"""

import csv
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union
from .assembly import AssembledSystem
from .evolve import EnergyTrace
from .geometry import Mesh
from .multiplier import MultiplierReport
from .operator import State
from .spectral import SpectrumResult, SweepResult

logger = logging.getLogger(__name__)

PathLike = Union[str, 'os.PathLike[str]']

TRACE_COLUMNS = ('t', 'E', 'D')
SWEEP_COLUMNS = ('omega', 'norm', 'scaled', 'iters')
SPECTRUM_COLUMNS = ('re_mu', 'im_mu', 'residual')
STATE_COLUMNS = ('node', 're_u', 'im_u', 're_v', 'im_v')
SAMPLE_COLUMNS = ('kind', 'x', 'y', 'value')


def _cell(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _prepare(path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target


def write_csv(
        path: PathLike,
        columns: Sequence[str],
        rows: Iterable[Sequence[object]]
        ) -> Path:
    """
    Writes a one-line header and the rows.
    """
    target = _prepare(path)
    with open(target, 'w', newline='') as stream:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.debug('wrote %s', target)
    return target


def write_mesh(
        mesh: Mesh,
        path: PathLike
        ) -> Path:
    """
    Writes `nodes N triangles T`, then N lines `x y`, T lines `i j k` and one line
    `i j tag` per boundary edge.
    """
    target = _prepare(path)
    with open(target, 'w') as stream:
        stream.write(f'nodes {mesh.node_count} triangles {mesh.triangle_count}\n')
        for x, y in mesh.nodes:
            stream.write(f'{float(x)!r} {float(y)!r}\n')
        for i, j, k in mesh.triangles:
            stream.write(f'{i} {j} {k}\n')
        for (i, j), code in zip(mesh.boundary_edges, mesh.boundary_codes):
            stream.write(f'{i} {j} {code}\n')
    return target


def write_matrices(
        system: AssembledSystem,
        directory: PathLike
        ) -> Path:
    """
    Writes every assembled matrix as `<name>.txt` with one `row col re im` line per entry.
    """
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    for name, matrix in system.matrices().items():
        entries = matrix.tocoo()
        with open(target / f'{name}.txt', 'w') as stream:
            for row, column, value in zip(entries.row, entries.col, entries.data):
                value = complex(value)
                stream.write(f'{row} {column} {value.real!r} {value.imag!r}\n')
    logger.info('dumped %d matrices to %s', len(system.matrices()), target)
    return target


def write_state(
        state: State,
        path: PathLike
        ) -> Path:
    rows = ((node, float(u.real), float(u.imag), float(v.real), float(v.imag))
            for node, (u, v) in enumerate(zip(state.u, state.v)))
    return write_csv(path, STATE_COLUMNS, rows)


def write_trace(
        trace: EnergyTrace,
        path: PathLike
        ) -> Path:
    rows = zip(trace.times.tolist(), trace.energies.tolist(), trace.dissipation.tolist())
    return write_csv(path, TRACE_COLUMNS, rows)


def write_sweep(
        sweep: SweepResult,
        path: PathLike
        ) -> Path:
    rows = ((sample.omega, sample.norm, sample.scaled, sample.iterations) for sample in sweep.samples)
    return write_csv(path, SWEEP_COLUMNS, rows)


def write_spectrum(
        spectrum: SpectrumResult,
        path: PathLike
        ) -> Path:
    rows = ((float(value.real), float(value.imag), float(residual))
            for value, residual in zip(spectrum.eigenvalues, spectrum.residuals))
    return write_csv(path, SPECTRUM_COLUMNS, rows)


def write_report(
        report: MultiplierReport,
        path: PathLike
        ) -> Path:
    target = _prepare(path)
    target.write_text(report.to_text())
    return target


def write_samples(
        report: MultiplierReport,
        path: PathLike
        ) -> Path:
    rows = ((sample.kind, sample.x, sample.y, sample.value) for sample in report.samples)
    return write_csv(path, SAMPLE_COLUMNS, rows)


def meta_path(path: PathLike) -> Path:
    """
    Gets the sidecar path `<artifact>.meta`.
    """
    target = Path(path)
    return target.with_name(target.name + '.meta')


def write_meta(
        path: PathLike,
        config: Mapping[str, object],
        version: str,
        summary: Mapping[str, object]
        ) -> Path:
    """
    Writes the sidecar of an artifact: the resolved config, the version, the command
    summary and, on the last line, the UTC timestamp.
    """
    target = meta_path(path)
    lines = [f'{key}={_cell(value)}' for key, value in config.items()]
    lines.append(f'version={version}')
    lines += [f'{key}={_cell(value)}' for key, value in summary.items()]
    lines.append(f'timestamp={datetime.now(timezone.utc).isoformat()}')
    target.write_text('\n'.join(lines) + '\n')
    return target
