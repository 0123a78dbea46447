"""
Checks of the multiplier hypotheses for a vector field h on a meshed domain:

(a) λ_min((J_h + J_hᵀ)/2) >= ρ > 0 in Ω,
(b) h parallel to ν with h·ν <= 0 on Γ0,
(c) h·ν >= m > 0 on Γ1.
"""

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple
import numpy as np
from ._asserts import assert_positive
from .errors import EvaluationError
from .geometry import BoundaryTag, LevelSetDomain, Mesh, boundary_normals

logger = logging.getLogger(__name__)

PlaneField = Callable[[np.ndarray], np.ndarray]
MatrixField = Callable[[np.ndarray], np.ndarray]

POLYGONAL_TOLERANCE = 1e-3
EXACT_TOLERANCE = 1e-8


class VectorField:
    """
    A C² vector field h: ℝ² → ℝ² with an optional analytic Jacobian J_h = [∂_j h_i].

    Remarks:
        Without an analytic Jacobian, central differences with step fd_step are used.
    """

    def __init__(
            self,
            h: PlaneField,
            jacobian: Optional[MatrixField] = None,
            fd_step: float = 1e-6
            ) -> None:
        assert_positive(fd_step, 'fd_step')
        self._h = h
        self._jacobian = jacobian
        self._fd_step = float(fd_step)

    @property
    def fd_step(self) -> float:
        return self._fd_step

    @property
    def has_jacobian(self) -> bool:
        return self._jacobian is not None

    def value(
            self,
            point: np.ndarray
            ) -> np.ndarray:
        """
        Gets h(point).

        Raises:
            EvaluationError:
                h raised, returned a non-2-vector or a non-finite value.
        """
        point = np.asarray(point, dtype=float)
        try:
            value = np.asarray(self._h(point), dtype=float)
        except Exception as error:
            raise EvaluationError(f'h failed at {point}.', error) from error
        if value.shape != (2,) or not np.all(np.isfinite(value)):
            raise EvaluationError(f'h must return a finite 2-vector, got {value} at {point}.')
        return value

    def jacobian(
            self,
            point: np.ndarray
            ) -> np.ndarray:
        """
        Gets the 2x2 Jacobian at point.

        Raises:
            EvaluationError:
                The Jacobian (or h, when differenced) failed or is not finite.
        """
        point = np.asarray(point, dtype=float)
        if self._jacobian is None:
            return self.fd_jacobian(point)
        try:
            matrix = np.asarray(self._jacobian(point), dtype=float)
        except Exception as error:
            raise EvaluationError(f'the Jacobian failed at {point}.', error) from error
        if matrix.shape != (2, 2) or not np.all(np.isfinite(matrix)):
            raise EvaluationError(f'the Jacobian must be a finite 2x2 matrix, got {matrix} at {point}.')
        return matrix

    def fd_jacobian(
            self,
            point: np.ndarray
            ) -> np.ndarray:
        """
        Gets the central-difference Jacobian at point.
        """
        point = np.asarray(point, dtype=float)
        step = self._fd_step
        columns = []
        for axis in range(2):
            offset = np.zeros(2)
            offset[axis] = step
            columns.append((self.value(point + offset) - self.value(point - offset)) / (2.0 * step))
        matrix = np.stack(columns, axis=1)
        return matrix

    def with_fd_step(
            self,
            fd_step: float
            ) -> 'VectorField':
        """
        Gets the same field differenced with another step and no analytic Jacobian.
        """
        return VectorField(self._h, None, fd_step)

    def rotated(
            self,
            angle: float
            ) -> 'VectorField':
        """
        Gets the field x ↦ R h(Rᵀx) that moves with a domain rotated by angle.
        """
        cos, sin = math.cos(angle), math.sin(angle)
        rotation = np.array([[cos, -sin], [sin, cos]])
        jacobian = None
        if self._jacobian is not None:
            jacobian = lambda point: rotation @ self.jacobian(rotation.T @ point) @ rotation.T
        rotated = VectorField(lambda point: rotation @ self.value(rotation.T @ point), jacobian, self._fd_step)
        return rotated


@dataclass(frozen=True)
class MultiplierSample:
    """
    One sampled quantity: λ_min(sym J_h) at an interior point, or h·ν at a boundary midpoint.
    """
    kind: str
    x: float
    y: float
    value: float


@dataclass(frozen=True)
class MultiplierReport:
    """
    Sampled values of the multiplier hypotheses and their verdicts.

    Remarks:
        Hypothesis (b) is judged twice: against POLYGONAL_TOLERANCE x max‖h‖, which chord
        normals of a curved Γ0 can meet, and against EXACT_TOLERANCE x max‖h‖.
    """
    rho: float
    gamma0_parallel_residual: float
    gamma0_max_hnu: float
    m: float
    h_scale: float
    polygonal_tolerance: float
    exact_tolerance: float
    samples: Tuple[MultiplierSample, ...] = field(default=(), repr=False)

    @property
    def verdict(self) -> Dict[str, bool]:
        """
        Gets pass/fail per hypothesis: a, b (polygonal), b_exact and c.
        """
        verdict = OrderedDict([
            ('a', self.rho > 0),
            ('b', self.gamma0_parallel_residual <= self.polygonal_tolerance
             and self.gamma0_max_hnu <= self.polygonal_tolerance),
            ('b_exact', self.gamma0_parallel_residual <= self.exact_tolerance
             and self.gamma0_max_hnu <= self.exact_tolerance),
            ('c', self.m > 0)])
        return verdict

    @property
    def passed(self) -> bool:
        verdict = self.verdict
        return verdict['a'] and verdict['b'] and verdict['c']

    def to_text(self) -> str:
        """
        Gets the report as key=value lines.
        """
        values = [
            ('rho', repr(self.rho)),
            ('gamma0_parallel_residual', repr(self.gamma0_parallel_residual)),
            ('gamma0_max_hnu', repr(self.gamma0_max_hnu)),
            ('m', repr(self.m)),
            ('h_scale', repr(self.h_scale)),
            ('tolerance_polygonal', repr(self.polygonal_tolerance)),
            ('tolerance_exact', repr(self.exact_tolerance))]
        values += [(f'verdict_{name}', 'pass' if ok else 'fail') for name, ok in self.verdict.items()]
        values.append(('verdict', 'pass' if self.passed else 'fail'))
        text = '\n'.join(f'{key}={value}' for key, value in values) + '\n'
        return text


def sample_jacobians(
        field: VectorField,
        mesh: Mesh
        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluates J_h at every triangle barycenter.

    Returns:
        (points, weights, jacobians) with weights the triangle areas and jacobians of
        shape (T, 2, 2).
    """
    points = mesh.barycenters()
    weights = mesh.signed_areas()
    jacobians = np.array([field.jacobian(point) for point in points]).reshape(-1, 2, 2)
    return points, weights, jacobians


def _boundary_values(
        field: VectorField,
        mesh: Mesh,
        tag: BoundaryTag
        ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    midpoints = mesh.edge_midpoints(tag)
    normals = boundary_normals(mesh, tag)
    values = np.array([field.value(point) for point in midpoints]).reshape(-1, 2)
    normal_parts = np.einsum('ij,ij->i', values, normals)
    return midpoints, values, normal_parts


def check_hypotheses(
        field: VectorField,
        mesh: Mesh
        ) -> MultiplierReport:
    """
    Samples the multiplier hypotheses on a mesh.

    Remarks:
        (a) is certified pointwise at triangle barycenters; (b) and (c) at midpoints of
        the tagged boundary edges with the outward normals of the polygonal loops.

    Raises:
        EvaluationError:
            The field could not be evaluated.
    """
    points, _, jacobians = sample_jacobians(field, mesh)
    symmetric = 0.5 * (jacobians + np.transpose(jacobians, (0, 2, 1)))
    lowest = np.linalg.eigvalsh(symmetric)[:, 0]
    rho = float(lowest.min())

    inner_points, inner_values, inner_hnu = _boundary_values(field, mesh, BoundaryTag.gamma_zero)
    inner_normals = boundary_normals(mesh, BoundaryTag.gamma_zero)
    tangential = inner_values - inner_hnu[:, None] * inner_normals
    parallel_residual = float(np.linalg.norm(tangential, axis=1).max())
    max_hnu = float(inner_hnu.max())

    outer_points, outer_values, outer_hnu = _boundary_values(field, mesh, BoundaryTag.gamma_one)
    m = float(outer_hnu.min())

    interior_values = np.array([field.value(point) for point in points]).reshape(-1, 2)
    h_scale = float(max(np.linalg.norm(interior_values, axis=1).max(),
                        np.linalg.norm(inner_values, axis=1).max(),
                        np.linalg.norm(outer_values, axis=1).max()))

    samples = tuple(
        [MultiplierSample('interior', float(x), float(y), float(value))
         for (x, y), value in zip(points, lowest)]
        + [MultiplierSample(str(BoundaryTag.gamma_zero), float(x), float(y), float(value))
           for (x, y), value in zip(inner_points, inner_hnu)]
        + [MultiplierSample(str(BoundaryTag.gamma_one), float(x), float(y), float(value))
           for (x, y), value in zip(outer_points, outer_hnu)])
    report = MultiplierReport(
        rho, parallel_residual, max_hnu, m, h_scale,
        POLYGONAL_TOLERANCE * h_scale, EXACT_TOLERANCE * h_scale, samples)
    logger.info('multiplier: rho=%.6g residual=%.3e max h.nu(G0)=%.6g m=%.6g -> %s',
                rho, parallel_residual, max_hnu, m, 'pass' if report.passed else 'fail')
    return report


def radial_field(center: Tuple[float, float] = (0.0, 0.0)) -> VectorField:
    """
    Gets h(x) = x - center, J_h = I.
    """
    origin = np.asarray(center, dtype=float)
    field = VectorField(lambda point: np.asarray(point, dtype=float) - origin, lambda point: np.eye(2))
    return field


def rotation_field() -> VectorField:
    """
    Gets h(x, y) = (y, -x), whose Jacobian has zero symmetric part.
    """
    field = VectorField(
        lambda point: np.array([point[1], -point[0]], dtype=float),
        lambda point: np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return field


def levelset_field(
        domain: LevelSetDomain,
        fd_step: float = 1e-6
        ) -> VectorField:
    """
    Gets h = ∇f with Jacobian the Hessian of f (differenced from grad_f when absent).
    """
    field = VectorField(domain.grad_f, domain.hessian, fd_step)
    return field
