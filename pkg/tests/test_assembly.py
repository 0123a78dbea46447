import math
import numpy as np
import pytest
from boundary_wave_lab.assembly import (
    assemble_boundary, assemble_bulk, assert_compatible, build_system, element_mass, element_stiffness)
from boundary_wave_lab.errors import AssemblyError, InvalidArgumentError
from boundary_wave_lab.geometry import BoundaryTag, boundary_length, build_annulus_mesh

REFERENCE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_reference_element_stiffness():
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])

    np.testing.assert_allclose(element_stiffness(REFERENCE), expected, atol=1e-15)


def test_reference_element_mass():
    expected = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 24.0

    np.testing.assert_allclose(element_mass(REFERENCE), expected, atol=1e-15)


def test_degenerate_element_is_rejected():
    with pytest.raises(AssemblyError):
        element_stiffness(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))


def test_bulk_matrices_integrate_constants_and_linears(small_mesh):
    m_bulk, k_bulk = assemble_bulk(small_mesh)
    ones = np.ones(small_mesh.node_count)
    x = small_mesh.nodes[:, 0]

    np.testing.assert_allclose(k_bulk @ ones, 0.0, atol=1e-12)
    assert ones @ m_bulk @ ones == pytest.approx(small_mesh.area())
    assert x @ k_bulk @ x == pytest.approx(small_mesh.area())
    assert abs(k_bulk - k_bulk.T).max() <= 1e-14


def test_boundary_matrices_live_on_their_loop(small_mesh):
    m_g0, k_g0 = assemble_boundary(small_mesh, BoundaryTag.gamma_zero)
    ones = np.ones(small_mesh.node_count)
    outside = np.setdiff1d(np.arange(small_mesh.node_count), small_mesh.tagged_nodes(BoundaryTag.gamma_zero))

    assert ones @ m_g0 @ ones == pytest.approx(boundary_length(small_mesh, BoundaryTag.gamma_zero))
    np.testing.assert_allclose(k_g0 @ ones, 0.0, atol=1e-12)
    assert abs(m_g0[outside]).sum() == 0.0


def test_laplace_beltrami_spectrum_of_the_inner_loop(small_mesh):
    _, k_g0 = assemble_boundary(small_mesh, BoundaryTag.gamma_zero)
    loop = small_mesh.tagged_nodes(BoundaryTag.gamma_zero)
    n_theta = len(loop)
    edge = 2.0 * math.sin(math.pi / n_theta)

    values = np.linalg.eigvalsh(k_g0[loop][:, loop].toarray())

    expected = np.sort((2.0 / edge) * (1.0 - np.cos(2.0 * np.pi * np.arange(n_theta) / n_theta)))
    np.testing.assert_allclose(values, expected, atol=1e-12)


def _weak_residual(n_r, n_theta):
    """
    Tests the discrete weak form of -Δu = -4 for u = x² + y² on the (1, 2) annulus,
    fluxes 4 on Γ1 and -2 on Γ0, against the interpolant of 1 + x².
    """
    system = build_system(build_annulus_mesh(1.0, 2.0, n_r, n_theta), 1.0)
    x, y = system.mesh.nodes.T
    ones = np.ones(system.size)
    residual = (system.k_bulk @ (x ** 2 + y ** 2) + 4.0 * (system.m_bulk @ ones)
                - 4.0 * (system.m_g1 @ ones) + 2.0 * (system.m_g0 @ ones))
    return float((1.0 + x ** 2) @ residual)


def test_weak_residual_of_a_quadratic_vanishes_at_second_order():
    meshes = ((5, 16), (9, 32), (17, 64))

    residuals = [abs(_weak_residual(n_r, n_theta)) for n_r, n_theta in meshes]

    orders = [math.log2(coarse / fine) for coarse, fine in zip(residuals, residuals[1:])]
    assert all(order >= 1.8 for order in orders)
    leading = 6.0 * math.pi ** 3 / 64 ** 2 + 0.5 * math.pi / 16 ** 2
    assert residuals[-1] == pytest.approx(leading, rel=0.05)


def test_gram_blocks(small_system):
    stiffness = small_system.k_tot.toarray()
    mass = small_system.m_h.toarray()

    assert np.linalg.eigvalsh(stiffness).min() > 0
    assert np.linalg.eigvalsh(mass).min() > 0
    np.testing.assert_allclose(stiffness,
                               (small_system.k_bulk + small_system.k_g0 + small_system.m_g1).toarray())
    assert list(small_system.matrices()) == ['m_bulk', 'k_bulk', 'm_g0', 'k_g0', 'm_g1', 'k_tot', 'm_h']


@pytest.mark.parametrize('alpha, allow_undamped', [(0.0, False), (-1.0, False), (-1.0, True), (float('nan'), True)])
def test_invalid_gain(small_mesh, alpha, allow_undamped):
    with pytest.raises(InvalidArgumentError):
        build_system(small_mesh, alpha, allow_undamped=allow_undamped)


def test_undamped_system_is_accepted_on_request(undamped_system):
    assert undamped_system.alpha == 0.0


def test_cache_reports_reuse(small_mesh):
    system = build_system(small_mesh, 2.0)
    calls = []

    first, reused_first = system.cached('key', lambda: calls.append(1) or 'value')
    second, reused_second = system.cached('key', lambda: calls.append(1) or 'other')

    assert (first, reused_first) == ('value', False)
    assert (second, reused_second) == ('value', True)
    assert len(calls) == 1


def test_assert_compatible(small_system):
    with pytest.raises(InvalidArgumentError):
        assert_compatible(small_system, np.zeros(3), 'u')
