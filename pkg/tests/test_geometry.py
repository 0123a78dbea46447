import math
import numpy as np
import pytest
from hypothesis import given, strategies as st
from boundary_wave_lab.errors import InvalidArgumentError, MeshError
from boundary_wave_lab.geometry import (
    BoundaryTag, LevelSetDomain, Mesh, boundary_length, boundary_normals, build_annulus_mesh,
    build_levelset_mesh, outward_normal)


def _tags(mesh):
    return [BoundaryTag.from_code(int(code)) for code in mesh.boundary_codes]


@given(n_r=st.integers(2, 6), n_theta=st.integers(8, 24))
def test_annulus_counts_and_polygon_area(n_r, n_theta):
    mesh = build_annulus_mesh(1.0, 2.0, n_r, n_theta)

    assert mesh.node_count == n_r * n_theta
    assert mesh.triangle_count == 2 * (n_r - 1) * n_theta
    assert len(mesh.tagged_edges(BoundaryTag.gamma_zero)) == n_theta
    assert len(mesh.tagged_edges(BoundaryTag.gamma_one)) == n_theta
    polygon = 0.5 * n_theta * math.sin(2 * math.pi / n_theta) * (2.0 ** 2 - 1.0 ** 2)
    assert mesh.area() == pytest.approx(polygon, rel=1e-12)
    assert np.all(mesh.signed_areas() > 0)


def test_boundary_lengths_are_chord_sums(small_mesh):
    assert boundary_length(small_mesh, BoundaryTag.gamma_zero) == pytest.approx(32 * math.sin(math.pi / 16))
    assert boundary_length(small_mesh, BoundaryTag.gamma_one) == pytest.approx(64 * math.sin(math.pi / 16))


def test_outward_normals_point_away_from_the_domain(small_mesh):
    inner = boundary_normals(small_mesh, BoundaryTag.gamma_zero)
    outer = boundary_normals(small_mesh, BoundaryTag.gamma_one)

    inner_mid = small_mesh.edge_midpoints(BoundaryTag.gamma_zero)
    outer_mid = small_mesh.edge_midpoints(BoundaryTag.gamma_one)
    np.testing.assert_allclose(np.linalg.norm(inner, axis=1), 1.0)
    assert np.all(np.einsum('ij,ij->i', inner, inner_mid) < 0)
    assert np.all(np.einsum('ij,ij->i', outer, outer_mid) > 0)


def test_outward_normal_rejects_interior_edges(small_mesh):
    with pytest.raises(InvalidArgumentError):
        outward_normal(small_mesh, (0, 16))


def test_boundary_loops_are_closed(small_mesh):
    for tag in BoundaryTag:
        loop = small_mesh.boundary_loop(tag)
        assert len(loop) == 16
        assert sorted(loop) == sorted(small_mesh.tagged_nodes(tag).tolist())


def test_mesh_rejects_untagged_boundary_edge(small_mesh):
    with pytest.raises(MeshError):
        Mesh(small_mesh.nodes, small_mesh.triangles, small_mesh.boundary_edges[:-1], _tags(small_mesh)[:-1])


def test_mesh_rejects_clockwise_triangle(small_mesh):
    triangles = small_mesh.triangles.copy()
    triangles[0] = triangles[0, ::-1]
    with pytest.raises(MeshError):
        Mesh(small_mesh.nodes, triangles, small_mesh.boundary_edges, _tags(small_mesh))


def test_mesh_rejects_missing_tag(small_mesh):
    with pytest.raises(MeshError):
        Mesh(small_mesh.nodes, small_mesh.triangles, small_mesh.boundary_edges, _tags(small_mesh)[:-1])


@pytest.mark.parametrize('r0, r1, n_r, n_theta', [
    (0.0, 2.0, 4, 16),
    (2.0, 1.0, 4, 16),
    (1.0, 2.0, 1, 16),
    (1.0, 2.0, 4, 4),
    (1.0, 2.0, 4.5, 16),
])
def test_annulus_rejects_invalid_parameters(r0, r1, n_r, n_theta):
    with pytest.raises(InvalidArgumentError):
        build_annulus_mesh(r0, r1, n_r, n_theta)


def test_swapped_tags_exchange_the_loops(small_mesh):
    swapped = small_mesh.with_swapped_tags()

    np.testing.assert_array_equal(swapped.tagged_nodes(BoundaryTag.gamma_zero),
                                  small_mesh.tagged_nodes(BoundaryTag.gamma_one))


def test_rotation_keeps_lengths(small_mesh):
    rotated = small_mesh.rotated(0.7)

    assert rotated.h_min == pytest.approx(small_mesh.h_min)
    assert rotated.area() == pytest.approx(small_mesh.area())


def test_levelset_mesh_of_radial_function_is_the_annulus():
    domain = LevelSetDomain.ellipse(1.0, 2.0)
    mesh = build_levelset_mesh(domain, 4, 16)

    np.testing.assert_allclose(mesh.nodes, build_annulus_mesh(1.0, 2.0, 4, 16).nodes, atol=1e-12)


def test_ellipse_mesh_nodes_lie_on_the_level_curves():
    domain = LevelSetDomain.ellipse(1.0, 2.0, aspect=1.5)
    mesh = build_levelset_mesh(domain, 5, 24)

    inner = mesh.nodes[mesh.tagged_nodes(BoundaryTag.gamma_zero)]
    outer = mesh.nodes[mesh.tagged_nodes(BoundaryTag.gamma_one)]
    np.testing.assert_allclose([domain.value(point) for point in inner], 0.5, atol=1e-12)
    np.testing.assert_allclose([domain.value(point) for point in outer], 2.0, atol=1e-12)
    assert np.all(mesh.signed_areas() > 0)


def test_levelset_domain_requires_center_below_inner_level():
    with pytest.raises(InvalidArgumentError):
        LevelSetDomain(lambda p: 0.5 * (p @ p) + 1.0, lambda p: p, 0.5, 2.0)


def test_levelset_mesh_rejects_vanishing_gradient():
    domain = LevelSetDomain(lambda p: 0.5 * (p @ p), lambda p: np.zeros(2), 0.5, 2.0)

    with pytest.raises(InvalidArgumentError):
        build_levelset_mesh(domain, 4, 16)
