"""
Annulus-type triangulations with two tagged boundary loops.

The meshes are structured rings x sectors: ring 0 is the inner loop (tagged Γ0, the
dynamic Laplace-Beltrami boundary) and the last ring is the outer loop (tagged Γ1,
the damped Robin boundary).
"""

import logging
import math
from collections import defaultdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import numpy as np
from scipy import optimize
from ._asserts import assert_at_least, assert_less, assert_positive
from ._str_enum import StrEnum
from .errors import EvaluationError, InvalidArgumentError, MeshError

logger = logging.getLogger(__name__)

ScalarField = Callable[[np.ndarray], float]
PlaneField = Callable[[np.ndarray], np.ndarray]

_LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


class BoundaryTag(StrEnum):
    """
    Boundary components of the domain.
    """
    gamma_zero = 'GammaZero'
    gamma_one = 'GammaOne'

    @property
    def code(self) -> int:
        """
        Gets the integer code used by the mesh export format.
        """
        code = 0 if self is BoundaryTag.gamma_zero else 1
        return code

    @classmethod
    def from_code(
            cls,
            code: int
            ) -> 'BoundaryTag':
        if code not in (0, 1):
            raise InvalidArgumentError(f'boundary tag code must be 0 or 1, got {code}.')
        tag = cls.gamma_zero if code == 0 else cls.gamma_one
        return tag


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Mesh:
    """
    An immutable triangulation of a planar domain with tagged boundary edges.

    Remarks:
        Triangles are counterclockwise; every boundary edge carries exactly one
        BoundaryTag. The constructor validates the topology, so a Mesh that exists
        is a valid one and may be shared read-only between threads.
    """

    def __init__(
            self,
            nodes: np.ndarray,
            triangles: np.ndarray,
            boundary_edges: np.ndarray,
            boundary_tags: Sequence[BoundaryTag]
            ) -> None:
        """
        Initializes a new instance of the Mesh class.

        Args:
            nodes:
                (N, 2) node coordinates.
            triangles:
                (T, 3) node indices of each triangle, counterclockwise.
            boundary_edges:
                (B, 2) node indices of each boundary edge.
            boundary_tags:
                The BoundaryTag of each boundary edge.

        Raises:
            MeshError:
                The arrays are malformed or the topology invariants do not hold.
        """
        self._nodes = _frozen(np.asarray(nodes, dtype=float))
        self._triangles = _frozen(np.asarray(triangles, dtype=np.int64))
        self._boundary_edges = _frozen(np.asarray(boundary_edges, dtype=np.int64).reshape(-1, 2))
        codes = [BoundaryTag.from_value(tag).code for tag in boundary_tags]
        self._boundary_codes = _frozen(np.asarray(codes, dtype=np.int8))
        self._check_shapes()
        self._unique_edges, self._edge_counts, self._owners = self._build_edge_table()
        self.validate()

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def triangles(self) -> np.ndarray:
        return self._triangles

    @property
    def boundary_edges(self) -> np.ndarray:
        return self._boundary_edges

    @property
    def boundary_codes(self) -> np.ndarray:
        """
        Gets the tag code (0 for Γ0, 1 for Γ1) of every boundary edge.
        """
        return self._boundary_codes

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def triangle_count(self) -> int:
        return len(self._triangles)

    @property
    def h_min(self) -> float:
        """
        Gets the length of the shortest edge.
        """
        lengths = self._lengths(self._unique_edges)
        return float(lengths.min())

    @property
    def h_max(self) -> float:
        """
        Gets the length of the longest edge.
        """
        lengths = self._lengths(self._unique_edges)
        return float(lengths.max())

    def tagged_edges(
            self,
            tag: BoundaryTag
            ) -> np.ndarray:
        """
        Gets the boundary edges carrying the tag.
        """
        tag = BoundaryTag.from_value(tag)
        edges = self._boundary_edges[self._boundary_codes == tag.code]
        return edges

    def tagged_nodes(
            self,
            tag: BoundaryTag
            ) -> np.ndarray:
        """
        Gets the sorted indices of the nodes lying on the tagged loop.
        """
        nodes = np.unique(self.tagged_edges(tag))
        return nodes

    def edge_lengths(
            self,
            tag: BoundaryTag
            ) -> np.ndarray:
        lengths = self._lengths(self.tagged_edges(tag))
        return lengths

    def edge_midpoints(
            self,
            tag: BoundaryTag
            ) -> np.ndarray:
        edges = self.tagged_edges(tag)
        midpoints = 0.5 * (self._nodes[edges[:, 0]] + self._nodes[edges[:, 1]])
        return midpoints

    def signed_areas(self) -> np.ndarray:
        """
        Gets the signed area of every triangle (positive when counterclockwise).
        """
        corners = self._nodes[self._triangles]
        first = corners[:, 1] - corners[:, 0]
        second = corners[:, 2] - corners[:, 0]
        areas = 0.5 * (first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0])
        return areas

    def barycenters(self) -> np.ndarray:
        centers = self._nodes[self._triangles].mean(axis=1)
        return centers

    def area(self) -> float:
        """
        Gets the area of the polygonal domain.
        """
        total = float(self.signed_areas().sum())
        return total

    def opposite_node(
            self,
            edge: Tuple[int, int]
            ) -> int:
        """
        Gets the vertex of the owning triangle that is not on the boundary edge.

        Raises:
            InvalidArgumentError:
                The edge is not a boundary edge.
        """
        key = (int(min(edge)), int(max(edge)))
        if key not in self._owners:
            raise InvalidArgumentError(f'edge {tuple(edge)} is not a boundary edge.')
        _, opposite = self._owners[key]
        return opposite

    def boundary_loop(
            self,
            tag: BoundaryTag
            ) -> List[int]:
        """
        Walks the tagged edges from their first node back to it.

        Returns:
            The nodes of the loop in traversal order.

        Raises:
            MeshError:
                The tagged edges do not form exactly one closed loop.
        """
        tag = BoundaryTag.from_value(tag)
        edges = self.tagged_edges(tag)
        if len(edges) < 3:
            raise MeshError(f'{tag} has {len(edges)} edges, a closed loop needs at least 3.')
        adjacency: Dict[int, List[int]] = defaultdict(list)
        for first, second in edges:
            adjacency[int(first)].append(int(second))
            adjacency[int(second)].append(int(first))
        if any(len(neighbours) != 2 for neighbours in adjacency.values()):
            raise MeshError(f'{tag} edges do not form a simple loop (a node has degree != 2).')
        start = int(edges[0, 0])
        loop = [start]
        previous, current = None, start
        while True:
            first, second = adjacency[current]
            following = first if first != previous else second
            if following == start:
                break
            loop.append(following)
            previous, current = current, following
            if len(loop) > len(edges):
                raise MeshError(f'{tag} edges do not close.')
        if len(loop) != len(edges):
            raise MeshError(f'{tag} edges form more than one loop.')
        return loop

    def validate(self) -> None:
        """
        Checks the edge ownership, orientation and loop invariants.

        Raises:
            MeshError:
                An invariant does not hold.
        """
        if self._edge_counts.size and self._edge_counts.max() > 2:
            raise MeshError('an edge is shared by more than two triangles.')
        areas = self.signed_areas()
        if np.any(areas <= 0):
            bad = int(np.argmin(areas))
            raise MeshError(f'triangle {bad} has non-positive signed area {areas[bad]:.3e}.')
        tagged = {(int(min(edge)), int(max(edge))) for edge in self._boundary_edges}
        if len(tagged) != len(self._boundary_edges):
            raise MeshError('a boundary edge is tagged more than once.')
        if tagged != set(self._owners):
            raise MeshError('tagged edges and edges owned by exactly one triangle differ.')
        loops = [set(self.boundary_loop(tag)) for tag in BoundaryTag]
        if loops[0] & loops[1]:
            raise MeshError('the Γ0 and Γ1 loops share nodes.')

    def rotated(
            self,
            angle: float
            ) -> 'Mesh':
        """
        Gets the mesh rigidly rotated about the origin, with the same topology and tags.
        """
        rotation = _rotation(angle)
        mesh = Mesh(self._nodes @ rotation.T, self._triangles, self._boundary_edges,
                    [BoundaryTag.from_code(int(code)) for code in self._boundary_codes])
        return mesh

    def with_swapped_tags(self) -> 'Mesh':
        """
        Gets the same mesh with the Γ0 and Γ1 tags exchanged.
        """
        mesh = Mesh(self._nodes, self._triangles, self._boundary_edges,
                    [BoundaryTag.from_code(1 - int(code)) for code in self._boundary_codes])
        return mesh

    def _check_shapes(self) -> None:
        if self._nodes.ndim != 2 or self._nodes.shape[1] != 2:
            raise MeshError(f'nodes must have shape (N, 2), got {self._nodes.shape}.')
        if self._triangles.ndim != 2 or self._triangles.shape[1] != 3:
            raise MeshError(f'triangles must have shape (T, 3), got {self._triangles.shape}.')
        if len(self._boundary_codes) != len(self._boundary_edges):
            raise MeshError('every boundary edge needs exactly one tag.')
        indices = np.concatenate([self._triangles.ravel(), self._boundary_edges.ravel()])
        if indices.size and (indices.min() < 0 or indices.max() >= len(self._nodes)):
            raise MeshError('a node index is out of range.')

    def _build_edge_table(self):
        local = self._triangles[:, _LOCAL_EDGES].reshape(-1, 2)
        edges = np.sort(local, axis=1)
        unique, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
        occurrences = counts[np.asarray(inverse).reshape(-1)]
        owners = {}
        for occurrence in np.flatnonzero(occurrences == 1):
            triangle, local_edge = divmod(int(occurrence), 3)
            opposite = int(self._triangles[triangle, (local_edge + 2) % 3])
            owners[(int(edges[occurrence, 0]), int(edges[occurrence, 1]))] = (triangle, opposite)
        return unique, counts, owners

    def _lengths(
            self,
            edges: np.ndarray
            ) -> np.ndarray:
        lengths = np.linalg.norm(self._nodes[edges[:, 1]] - self._nodes[edges[:, 0]], axis=1)
        return lengths


def _rotation(angle: float) -> np.ndarray:
    cosine, sine = math.cos(angle), math.sin(angle)
    rotation = np.array([[cosine, -sine], [sine, cosine]])
    return rotation


def _ring_mesh(rings: np.ndarray) -> Mesh:
    """
    Triangulates (n_r, n_theta, 2) ring coordinates, two triangles per cell.
    """
    n_r, n_theta = rings.shape[:2]
    ring = np.arange(n_r - 1)[:, None]
    sector = np.arange(n_theta)[None, :]
    inner = ring * n_theta + sector
    inner_next = ring * n_theta + (sector + 1) % n_theta
    outer_next = inner_next + n_theta
    outer = inner + n_theta
    triangles = np.concatenate([
        np.stack([inner, outer_next, inner_next], axis=-1).reshape(-1, 3),
        np.stack([inner, outer, outer_next], axis=-1).reshape(-1, 3)])
    loop = np.arange(n_theta)
    loop_edges = np.stack([loop, (loop + 1) % n_theta], axis=1)
    boundary_edges = np.concatenate([loop_edges, loop_edges + (n_r - 1) * n_theta])
    tags = [BoundaryTag.gamma_zero] * n_theta + [BoundaryTag.gamma_one] * n_theta
    mesh = Mesh(rings.reshape(-1, 2), triangles, boundary_edges, tags)
    return mesh


def _assert_counts(
        n_r: int,
        n_theta: int
        ) -> None:
    for value, name in ((n_r, 'n_r'), (n_theta, 'n_theta')):
        if int(value) != value:
            raise InvalidArgumentError(f'{name} must be an integer, got {value}.')
    assert_at_least(n_r, 2, 'n_r')
    assert_at_least(n_theta, 8, 'n_theta')


def build_annulus_mesh(
        r0: float,
        r1: float,
        n_r: int,
        n_theta: int
        ) -> Mesh:
    """
    Builds the structured mesh of the annulus r0 < |x| < r1.

    Args:
        r0:
            Inner radius (the Γ0 loop).
        r1:
            Outer radius (the Γ1 loop).
        n_r:
            Number of concentric rings of nodes, at least 2.
        n_theta:
            Number of nodes per ring, at least 8.

    Returns:
        A mesh with n_r * n_theta nodes and 2 (n_r - 1) n_theta triangles.

    Raises:
        InvalidArgumentError:
            A parameter is outside its domain.
    """
    assert_positive(r0, 'r0')
    assert_less(r0, r1, 'r0', 'r1')
    _assert_counts(n_r, n_theta)
    n_r, n_theta = int(n_r), int(n_theta)
    angles = 2.0 * np.pi * np.arange(n_theta) / n_theta
    radii = np.linspace(r0, r1, n_r)
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    rings = radii[:, None, None] * directions[None, :, :]
    mesh = _ring_mesh(rings)
    logger.debug('annulus mesh r0=%g r1=%g: %d nodes, %d triangles', r0, r1, mesh.node_count, mesh.triangle_count)
    return mesh


def outward_normal(
        mesh: Mesh,
        edge: Tuple[int, int]
        ) -> np.ndarray:
    """
    Gets the unit normal of a boundary edge pointing out of its owning triangle.

    Raises:
        InvalidArgumentError:
            The edge is not a boundary edge.
    """
    opposite = mesh.opposite_node(edge)
    first, second = mesh.nodes[edge[0]], mesh.nodes[edge[1]]
    tangent = second - first
    normal = np.array([tangent[1], -tangent[0]]) / np.linalg.norm(tangent)
    if normal @ (mesh.nodes[opposite] - first) > 0:
        normal = -normal
    return normal


def boundary_normals(
        mesh: Mesh,
        tag: BoundaryTag
        ) -> np.ndarray:
    """
    Gets the outward normals of all edges carrying the tag, in tagged-edge order.
    """
    edges = mesh.tagged_edges(tag)
    normals = np.array([outward_normal(mesh, tuple(edge)) for edge in edges]).reshape(-1, 2)
    return normals


def boundary_length(
        mesh: Mesh,
        tag: BoundaryTag
        ) -> float:
    """
    Gets the length of the polygonal loop carrying the tag.
    """
    length = float(mesh.edge_lengths(tag).sum())
    return length


class LevelSetDomain:
    """
    The domain {k0 < f < k1} between two level curves of a scalar field.

    Remarks:
        Meshing follows rays from the center, so the sublevel sets must be star-shaped
        about it; f(center) < k0 is required, which also places k0 above the infimum of f.
    """

    def __init__(
            self,
            f: ScalarField,
            grad_f: PlaneField,
            k0: float,
            k1: float,
            hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
            center: Tuple[float, float] = (0.0, 0.0)
            ) -> None:
        assert_less(k0, k1, 'k0', 'k1')
        self._f = f
        self._grad_f = grad_f
        self._k0 = float(k0)
        self._k1 = float(k1)
        self._hessian = hessian
        self._center = np.asarray(center, dtype=float)
        center_value = self.value(self._center)
        if not center_value < self._k0:
            raise InvalidArgumentError(
                f'k0={k0} must lie strictly above f(center)={center_value}.')

    @property
    def f(self) -> ScalarField:
        return self._f

    @property
    def grad_f(self) -> PlaneField:
        return self._grad_f

    @property
    def hessian(self) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        return self._hessian

    @property
    def k0(self) -> float:
        return self._k0

    @property
    def k1(self) -> float:
        return self._k1

    @property
    def center(self) -> np.ndarray:
        return self._center

    def value(
            self,
            point: np.ndarray
            ) -> float:
        try:
            value = float(self._f(np.asarray(point, dtype=float)))
        except Exception as error:
            raise EvaluationError(f'f failed at {point}.', error) from error
        if not math.isfinite(value):
            raise EvaluationError(f'f is not finite at {point}.')
        return value

    def ray_radius(
            self,
            angle: float,
            level: float
            ) -> float:
        """
        Gets the distance from the center to the level curve along a ray.

        Raises:
            InvalidArgumentError:
                The sublevel set is unbounded along the ray.
        """
        direction = np.array([math.cos(angle), math.sin(angle)])

        def excess(radius: float) -> float:
            return self.value(self._center + radius * direction) - level

        upper = 1.0
        for _ in range(64):
            if excess(upper) > 0:
                break
            upper *= 2.0
        else:
            raise InvalidArgumentError(f'level {level} is not reached along the ray at angle {angle}.')
        radius = optimize.brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-14)
        return radius

    def assert_regular(
            self,
            points: np.ndarray
            ) -> None:
        """
        Checks that grad f does not vanish at the sample points.

        Raises:
            InvalidArgumentError:
                grad f vanishes at a sample point.
        """
        for point in points:
            try:
                gradient = np.asarray(self._grad_f(point), dtype=float)
            except Exception as error:
                raise EvaluationError(f'grad_f failed at {point}.', error) from error
            if not np.linalg.norm(gradient) > 1e-12:
                raise InvalidArgumentError(f'grad f vanishes at {point}.')

    @classmethod
    def ellipse(
            cls,
            r0: float,
            r1: float,
            aspect: float = 1.0
            ) -> 'LevelSetDomain':
        """
        Gets the elliptic ring between two level curves of f(x, y) = (x²/aspect² + y²)/2.

        Remarks:
            aspect = 1 gives the annulus r0 < |x| < r1.
        """
        assert_positive(r0, 'r0')
        assert_less(r0, r1, 'r0', 'r1')
        assert_positive(aspect, 'aspect')
        scale = 1.0 / aspect ** 2
        domain = cls(
            f=lambda point: 0.5 * (scale * point[0] ** 2 + point[1] ** 2),
            grad_f=lambda point: np.array([scale * point[0], point[1]]),
            k0=0.5 * r0 ** 2,
            k1=0.5 * r1 ** 2,
            hessian=lambda point: np.diag([scale, 1.0]))
        return domain


def build_levelset_mesh(
        domain: LevelSetDomain,
        n_r: int,
        n_theta: int
        ) -> Mesh:
    """
    Builds the structured ring mesh between the k0 and k1 level curves.

    Remarks:
        Each ray from the center is cut by bisection at both level curves and the
        segment between them is split into n_r - 1 equal pieces.

    Raises:
        InvalidArgumentError:
            A parameter is outside its domain, a level is not reached or grad f vanishes
            on a level curve.
    """
    _assert_counts(n_r, n_theta)
    n_r, n_theta = int(n_r), int(n_theta)
    angles = 2.0 * np.pi * np.arange(n_theta) / n_theta
    inner = np.array([domain.ray_radius(angle, domain.k0) for angle in angles])
    outer = np.array([domain.ray_radius(angle, domain.k1) for angle in angles])
    if np.any(outer <= inner):
        raise InvalidArgumentError('the k1 curve must enclose the k0 curve along every ray.')
    fractions = np.linspace(0.0, 1.0, n_r)
    radii = inner[None, :] + fractions[:, None] * (outer - inner)[None, :]
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    rings = domain.center[None, None, :] + radii[:, :, None] * directions[None, :, :]
    domain.assert_regular(rings[0])
    domain.assert_regular(rings[-1])
    mesh = _ring_mesh(rings)
    logger.debug('level-set mesh: %d nodes, %d triangles', mesh.node_count, mesh.triangle_count)
    return mesh
