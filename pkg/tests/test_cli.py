import csv
import json
import numpy as np
import pytest
from boundary_wave_lab import __version__
from boundary_wave_lab.cli import RunConfig, main

SMALL = ['--nr', '4', '--ntheta', '16']


def _rows(path):
    with open(path, newline='') as stream:
        return list(csv.reader(stream))


def _meta(path):
    lines = path.with_name(path.name + '.meta').read_text().splitlines()
    return lines, dict(line.split('=', 1) for line in lines)


def test_mesh_writes_the_export_and_its_meta(tmp_path):
    target = tmp_path / 'mesh.txt'

    status = main(['mesh', *SMALL, '--mesh-out', str(target)])

    lines = target.read_text().splitlines()
    assert status == 0
    assert lines[0] == 'nodes 64 triangles 96'
    assert len(lines) == 1 + 64 + 96 + 32
    meta_lines, meta = _meta(target)
    assert meta['version'] == __version__
    assert meta['n_theta'] == '16'
    assert meta['nodes'] == '64'
    assert meta_lines[-1].startswith('timestamp=')


def test_invalid_radii_exit_with_status_two(tmp_path, capsys):
    target = tmp_path / 'mesh.txt'

    status = main(['mesh', '--r0', '2', '--r1', '1', '--mesh-out', str(target)])

    assert status == 2
    assert not target.exists()
    assert '--r1 must exceed --r0' in capsys.readouterr().err


def test_every_validation_error_is_reported(tmp_path, capsys):
    status = main(['mesh', '--r0', '-1', '--nr', '1', '--mesh-out', str(tmp_path / 'mesh.txt')])

    error = capsys.readouterr().err
    assert status == 2
    assert '--r0 must be positive' in error
    assert '--nr must be at least 2' in error
    assert '; ' in error


def test_unknown_flag_exits_with_status_two(capsys):
    assert main(['mesh', '--radius', '3']) == 2
    assert 'usage' in capsys.readouterr().err


def test_unknown_command_exits_with_status_two():
    assert main(['solve']) == 2


def test_simulate_writes_a_contracting_trace(tmp_path, capsys):
    target = tmp_path / 'trace.csv'
    state = tmp_path / 'state.csv'

    status = main(['simulate', *SMALL, '--T', '4', '--trace-out', str(target), '--state-out', str(state)])

    rows = _rows(target)
    energies = np.array([float(row[1]) for row in rows[1:]])
    assert status == 0
    assert rows[0] == ['t', 'E', 'D']
    assert np.all(np.diff(energies) <= 1e-10 * energies[0])
    assert len(_rows(state)) == 65
    assert _meta(state)[1]['command'] == 'simulate'
    _, meta = _meta(target)
    assert float(meta['fit_lo']) == 2.0
    assert 'exponent=' in capsys.readouterr().err


def test_simulate_rejects_a_window_beyond_the_horizon(tmp_path):
    status = main(['simulate', *SMALL, '--T', '4', '--fit-hi', '8', '--trace-out', str(tmp_path / 'trace.csv')])

    assert status == 2


def test_short_fit_window_is_rejected_before_any_file_is_written(tmp_path, capsys):
    target = tmp_path / 'trace.csv'

    status = main(['simulate', *SMALL, '--T', '4', '--dt', '0.5', '--trace-out', str(target)])

    assert status == 2
    assert 'sample times' in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_short_fit_window_at_the_default_step_writes_nothing(tmp_path):
    status = main(['simulate', *SMALL, '--T', '4', '--fit-lo', '3.9', '--fit-hi', '4',
                   '--trace-out', str(tmp_path / 'trace.csv'), '--state-out', str(tmp_path / 'state.csv'),
                   '--dump-matrices', str(tmp_path / 'matrices')])

    assert status == 2
    assert list(tmp_path.iterdir()) == []


def test_undamped_run_needs_the_flag(tmp_path):
    target = tmp_path / 'trace.csv'

    assert main(['simulate', *SMALL, '--alpha', '0', '--T', '4', '--trace-out', str(target)]) == 2
    assert main(['simulate', *SMALL, '--alpha', '0', '--undamped', '--T', '4', '--trace-out', str(target)]) == 0


def test_sweep_writes_one_row_per_sample(tmp_path, capsys):
    target = tmp_path / 'sweep.csv'

    status = main(['sweep', *SMALL, '--omega-max', '3', '--samples', '10', '--jobs', '2',
                   '--sweep-out', str(target)])

    rows = _rows(target)
    assert status == 0
    assert rows[0] == ['omega', 'norm', 'scaled', 'iters']
    assert len(rows) == 11
    assert 'slope=' in capsys.readouterr().err


def test_spectrum_writes_the_requested_count(tmp_path):
    target = tmp_path / 'spectrum.csv'

    status = main(['spectrum', *SMALL, '--count', '10', '--spectrum-out', str(target)])

    rows = _rows(target)
    assert status == 0
    assert rows[0] == ['re_mu', 'im_mu', 'residual']
    assert len(rows) == 11
    assert all(float(row[0]) > 0 for row in rows[1:])


def test_spectrum_count_above_the_dimension_fails(tmp_path, capsys):
    status = main(['spectrum', *SMALL, '--count', '1000', '--spectrum-out', str(tmp_path / 'spectrum.csv')])

    assert status == 2
    assert 'count must be at most' in capsys.readouterr().err


def test_check_h_reports_a_pass_for_the_radial_field(tmp_path):
    report = tmp_path / 'report.txt'
    samples = tmp_path / 'samples.csv'

    status = main(['check-h', *SMALL, '--report-out', str(report), '--samples-out', str(samples)])

    assert status == 0
    assert 'verdict=pass' in report.read_text().splitlines()
    assert _rows(samples)[0] == ['kind', 'x', 'y', 'value']
    assert len(_rows(samples)) == 1 + 96 + 32
    assert _meta(samples)[1]['verdict'] == 'pass'


def test_check_h_reports_a_fail_for_the_rotation_field(tmp_path):
    report = tmp_path / 'report.txt'

    status = main(['check-h', *SMALL, '--field', 'rotation', '--report-out', str(report)])

    assert status == 0
    assert 'verdict_a=fail' in report.read_text().splitlines()


def test_flags_override_the_configuration_file(tmp_path):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps({'nr': 4, '--ntheta': 16, 'r1': 3.0}))
    target = tmp_path / 'mesh.txt'

    status = main(['mesh', '--config', str(config), '--ntheta', '12', '--mesh-out', str(target)])

    assert status == 0
    assert target.read_text().splitlines()[0] == 'nodes 48 triangles 72'
    _, meta = _meta(target)
    assert meta['r1'] == '3.0'


@pytest.mark.parametrize('values', [{'radius': 3}, {'nr': 4.5}, {'undamped': 'yes'}, {'field': 'spiral'}])
def test_invalid_configuration_files(tmp_path, values):
    config = tmp_path / 'run.json'
    config.write_text(json.dumps(values))

    assert main(['mesh', '--config', str(config), '--mesh-out', str(tmp_path / 'mesh.txt')]) == 2


def test_reruns_are_byte_identical(tmp_path):
    first = tmp_path / 'first.csv'
    second = tmp_path / 'second.csv'

    for target in (first, second):
        assert main(['simulate', *SMALL, '--T', '4', '--initial', 'random', '--seed', '3',
                     '--trace-out', str(target)]) == 0

    assert first.read_bytes() == second.read_bytes()


def test_matrices_are_dumped_on_request(tmp_path):
    directory = tmp_path / 'matrices'

    status = main(['spectrum', *SMALL, '--count', '4', '--spectrum-out', str(tmp_path / 'spectrum.csv'),
                   '--dump-matrices', str(directory)])

    assert status == 0
    assert sorted(path.stem for path in directory.glob('*.txt')) == sorted(
        ['m_bulk', 'k_bulk', 'm_g0', 'k_g0', 'm_g1', 'k_tot', 'm_h'])
    first = (directory / 'k_tot.txt').read_text().splitlines()[0].split()
    assert len(first) == 4
    meta = (directory / 'matrices.meta').read_text().splitlines()
    assert 'matrices=7' in meta
    assert meta[-1].startswith('timestamp=')


def test_defaults():
    config = RunConfig.parse(['mesh'])

    assert config.n_theta == 32
    assert config.shift == 5.0j
    assert config.fit_window == (5.0, 50.0)
    assert list(config.resolved())[:3] == ['config', 'command', 'r0']


def test_unwritable_output_is_a_computation_error(tmp_path, capsys):
    blocker = tmp_path / 'blocker'
    blocker.write_text('')

    status = main(['mesh', *SMALL, '--mesh-out', str(blocker / 'mesh.txt')])

    assert status == 1
    assert 'ArtifactError: could not write the artifacts of mesh' in capsys.readouterr().err
