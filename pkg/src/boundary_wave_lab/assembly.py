"""
P1 finite element matrices of the bulk Laplacian, the Laplace-Beltrami operator on Γ0
and the boundary mass terms, gathered into the energy Gram blocks.
"""

import logging
import threading
from collections import OrderedDict
from typing import Callable, Hashable, Tuple, TypeVar
import numpy as np
import scipy.sparse as sps
from ._asserts import assert_non_negative, assert_positive
from .errors import AssemblyError, InvalidArgumentError
from .geometry import BoundaryTag, Mesh

logger = logging.getLogger(__name__)

T_Cached = TypeVar('T_Cached')

_ELEMENT_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
_EDGE_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_EDGE_STIFFNESS = np.array([[1.0, -1.0], [-1.0, 1.0]])


def _opposite_edges(corners: np.ndarray) -> np.ndarray:
    """
    Gets the edge opposite each vertex, (T, 3, 2) for (T, 3, 2) corners.
    """
    edges = np.stack([
        corners[:, 2] - corners[:, 1],
        corners[:, 0] - corners[:, 2],
        corners[:, 1] - corners[:, 0]], axis=1)
    return edges


def _areas(corners: np.ndarray) -> np.ndarray:
    first = corners[:, 1] - corners[:, 0]
    second = corners[:, 2] - corners[:, 0]
    areas = 0.5 * (first[:, 0] * second[:, 1] - first[:, 1] * second[:, 0])
    return areas


def _element_matrices(corners: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    areas = _areas(corners)
    if np.any(areas <= 0):
        bad = int(np.argmin(areas))
        raise AssemblyError(f'triangle {bad} is degenerate (signed area {areas[bad]:.3e}).')
    edges = _opposite_edges(corners)
    # grad of the barycentric coordinate i is the opposite edge rotated by 90°, over 2|T|
    stiffness = np.einsum('tik,tjk->tij', edges, edges) / (4.0 * areas[:, None, None])
    mass = areas[:, None, None] * _ELEMENT_MASS[None, :, :]
    return mass, stiffness


def element_stiffness(vertices: np.ndarray) -> np.ndarray:
    """
    Gets the P1 stiffness matrix of one counterclockwise triangle.

    Raises:
        AssemblyError:
            The triangle is degenerate.
    """
    _, stiffness = _element_matrices(np.asarray(vertices, dtype=float)[None])
    return stiffness[0]


def element_mass(vertices: np.ndarray) -> np.ndarray:
    """
    Gets the P1 mass matrix of one counterclockwise triangle.
    """
    mass, _ = _element_matrices(np.asarray(vertices, dtype=float)[None])
    return mass[0]


def _scatter(
        connectivity: np.ndarray,
        local: np.ndarray,
        size: int
        ) -> sps.csr_matrix:
    width = connectivity.shape[1]
    rows = np.repeat(connectivity, width, axis=1).ravel()
    columns = np.tile(connectivity, (1, width)).ravel()
    matrix = sps.coo_matrix((local.ravel(), (rows, columns)), shape=(size, size)).tocsr()
    matrix.sum_duplicates()
    return matrix


def assemble_bulk(mesh: Mesh) -> Tuple[sps.csr_matrix, sps.csr_matrix]:
    """
    Assembles the bulk mass and stiffness matrices with exact P1 integration.

    Returns:
        (M_bulk, K_bulk): ∫_Ω φi φj and ∫_Ω ∇φi·∇φj.

    Raises:
        AssemblyError:
            A triangle has non-positive area.
    """
    corners = mesh.nodes[mesh.triangles]
    mass, stiffness = _element_matrices(corners)
    m_bulk = _scatter(mesh.triangles, mass, mesh.node_count)
    k_bulk = _scatter(mesh.triangles, stiffness, mesh.node_count)
    return m_bulk, k_bulk


def assemble_boundary(
        mesh: Mesh,
        tag: BoundaryTag
        ) -> Tuple[sps.csr_matrix, sps.csr_matrix]:
    """
    Assembles 1D P1 mass and arc-length stiffness matrices along the tagged loop.

    Remarks:
        The stiffness is the weak form of -Δ_Γ on the loop; on a closed loop it
        annihilates constants.

    Returns:
        (M_edge, K_edge) as node_count x node_count matrices supported on the loop.

    Raises:
        AssemblyError:
            A tagged edge has zero length.
    """
    edges = mesh.tagged_edges(tag)
    lengths = mesh.edge_lengths(tag)
    if np.any(lengths <= 0):
        raise AssemblyError(f'{tag} has an edge of zero length.')
    mass = lengths[:, None, None] * _EDGE_MASS[None, :, :]
    stiffness = _EDGE_STIFFNESS[None, :, :] / lengths[:, None, None]
    m_edge = _scatter(edges, mass, mesh.node_count)
    k_edge = _scatter(edges, stiffness, mesh.node_count)
    return m_edge, k_edge


class AssembledSystem:
    """
    The discrete operators of the closed-loop system on one mesh.

    Remarks:
        K_tot = K_bulk + K_g0 + M_g1 is the Gram matrix of the V scalar product and
        M_H = M_bulk + M_g0 the Gram matrix of H = L²(Ω) × L²(Γ0); the trace constraint
        of V holds because boundary nodes are shared by both terms. The matrices never
        change after construction; factorizations derived from them are memoized through
        cached(), which is safe to call from several threads.
    """

    _cache_size = 16

    def __init__(
            self,
            mesh: Mesh,
            alpha: float,
            m_bulk: sps.csr_matrix,
            k_bulk: sps.csr_matrix,
            m_g0: sps.csr_matrix,
            k_g0: sps.csr_matrix,
            m_g1: sps.csr_matrix
            ) -> None:
        self._mesh = mesh
        self._alpha = float(alpha)
        self._m_bulk = m_bulk
        self._k_bulk = k_bulk
        self._m_g0 = m_g0
        self._k_g0 = k_g0
        self._m_g1 = m_g1
        self._k_tot = (k_bulk + k_g0 + m_g1).tocsr()
        self._m_h = (m_bulk + m_g0).tocsr()
        self._cache: 'OrderedDict[Hashable, object]' = OrderedDict()
        self._lock = threading.Lock()

    @property
    def mesh(self) -> Mesh:
        return self._mesh

    @property
    def alpha(self) -> float:
        """
        Gets the feedback gain of the Robin velocity feedback on Γ1.
        """
        return self._alpha

    @property
    def size(self) -> int:
        """
        Gets the number of nodal unknowns of each state component.
        """
        return self._mesh.node_count

    @property
    def m_bulk(self) -> sps.csr_matrix:
        return self._m_bulk

    @property
    def k_bulk(self) -> sps.csr_matrix:
        return self._k_bulk

    @property
    def m_g0(self) -> sps.csr_matrix:
        return self._m_g0

    @property
    def k_g0(self) -> sps.csr_matrix:
        return self._k_g0

    @property
    def m_g1(self) -> sps.csr_matrix:
        return self._m_g1

    @property
    def k_tot(self) -> sps.csr_matrix:
        return self._k_tot

    @property
    def m_h(self) -> sps.csr_matrix:
        return self._m_h

    def matrices(self) -> 'OrderedDict[str, sps.csr_matrix]':
        """
        Gets every assembled matrix by name.
        """
        named = OrderedDict([
            ('m_bulk', self._m_bulk), ('k_bulk', self._k_bulk), ('m_g0', self._m_g0),
            ('k_g0', self._k_g0), ('m_g1', self._m_g1), ('k_tot', self._k_tot), ('m_h', self._m_h)])
        return named

    def cached(
            self,
            key: Hashable,
            factory: Callable[[], T_Cached]
            ) -> Tuple[T_Cached, bool]:
        """
        Gets a memoized object derived from the matrices, building it on first use.

        Args:
            key:
                Identifies the object, e.g. ('schur', shift).
            factory:
                Builds the object when it is not cached yet.

        Returns:
            The object and whether it came from the cache.
        """
        with self._lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key], True
        value = factory()
        with self._lock:
            self._cache[key] = value
            while len(self._cache) > self._cache_size:
                self._cache.popitem(last=False)
        return value, False


def build_system(
        mesh: Mesh,
        alpha: float,
        allow_undamped: bool = False
        ) -> AssembledSystem:
    """
    Assembles every matrix of the closed-loop system.

    Args:
        mesh:
            The mesh with tagged Γ0 and Γ1 loops.
        alpha:
            The feedback gain, > 0.
        allow_undamped:
            Accept alpha = 0, the conservative reference configuration.

    Raises:
        InvalidArgumentError:
            alpha is not positive (or negative when allow_undamped is set).
        AssemblyError:
            A degenerate element was found.
    """
    if allow_undamped:
        assert_non_negative(alpha, 'alpha')
    else:
        assert_positive(alpha, 'alpha')
    m_bulk, k_bulk = assemble_bulk(mesh)
    m_g0, k_g0 = assemble_boundary(mesh, BoundaryTag.gamma_zero)
    m_g1, _ = assemble_boundary(mesh, BoundaryTag.gamma_one)
    system = AssembledSystem(mesh, alpha, m_bulk, k_bulk, m_g0, k_g0, m_g1)
    logger.info('assembled system: %d nodes, %d non-zeros in K_tot, alpha=%g',
                system.size, system.k_tot.nnz, alpha)
    return system


def assert_compatible(
        system: AssembledSystem,
        vector: np.ndarray,
        name: str
        ) -> None:
    """
    Asserts that a nodal vector lives on the system's mesh.

    Raises:
        InvalidArgumentError:
            The vector length is not the node count.
    """
    if np.shape(vector) != (system.size,):
        raise InvalidArgumentError(f'{name} must have shape ({system.size},), got {np.shape(vector)}.')
