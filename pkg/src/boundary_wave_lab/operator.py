"""
The discrete generator 𝒜 of the closed-loop system and its resolvent.

A state is X = [u, v] with u in the discrete V (K_tot Gram) and v in the discrete H
(M_H Gram). The generator acts as

    𝒜[u, v] = [-v, M_H⁻¹(K_tot u + α M_g1 v)]

which is the weak form of the wave equation with the Laplace-Beltrami dynamic
condition on Γ0 and the Robin velocity feedback ∂νu + u = -α v on Γ1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
import numpy as np
import scipy.sparse as sps
from scipy.sparse import linalg as spla
from ._asserts import assert_same_size
from .assembly import AssembledSystem, assert_compatible
from .errors import AtEigenvalueError, ConvergenceError, InvalidArgumentError, LinearSolverError

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-14
RESOLVE_TOLERANCE = 1e-10


class State:
    """
    An element [u, v] of the discrete energy space: nodal position and velocity.

    Remarks:
        The Γ0 trace of u is carried by its boundary entries, so the trace constraint
        of V holds for every State. States are value-like: arithmetic returns new states.
    """

    __slots__ = ('_u', '_v')

    def __init__(
            self,
            u: np.ndarray,
            v: np.ndarray
            ) -> None:
        u = np.array(u, dtype=complex)
        v = np.array(v, dtype=complex)
        if u.ndim != 1 or u.shape != v.shape:
            raise InvalidArgumentError(f'u and v must be vectors of one length, got {u.shape} and {v.shape}.')
        u.setflags(write=False)
        v.setflags(write=False)
        self._u = u
        self._v = v

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def v(self) -> np.ndarray:
        return self._v

    @property
    def size(self) -> int:
        return len(self._u)

    @classmethod
    def zeros(
            cls,
            size: int
            ) -> 'State':
        state = cls(np.zeros(size), np.zeros(size))
        return state

    @classmethod
    def random(
            cls,
            size: int,
            rng: np.random.Generator
            ) -> 'State':
        """
        Gets a state with independent standard complex Gaussian entries.
        """
        parts = rng.standard_normal((4, size))
        state = cls(parts[0] + 1j * parts[1], parts[2] + 1j * parts[3])
        return state

    def time_reversed(self) -> 'State':
        """
        Gets [u, -v].
        """
        return State(self._u, -self._v)

    def __add__(self, other: 'State') -> 'State':
        return State(self._u + other.u, self._v + other.v)

    def __sub__(self, other: 'State') -> 'State':
        return State(self._u - other.u, self._v - other.v)

    def __neg__(self) -> 'State':
        return State(-self._u, -self._v)

    def __mul__(self, scalar: complex) -> 'State':
        return State(scalar * self._u, scalar * self._v)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> 'State':
        return State(self._u / scalar, self._v / scalar)

    def __repr__(self) -> str:
        return f'State(size={self.size})'


@dataclass(frozen=True)
class ResolventSolve:
    """
    The solution X of (𝒜 + λ)X = F with its energy-norm relative residual.
    """
    shift: complex
    state: State
    residual: float
    factorization_reused: bool


@dataclass(frozen=True)
class OperatorNorm:
    """
    An energy operator norm estimate from power iteration on T^⋆T.

    Remarks:
        history holds the Rayleigh quotients ‖T x_k‖² of the normalized iterates.
    """
    norm: float
    iterations: int
    history: Tuple[float, ...] = field(default=())


def _assert_state(
        system: AssembledSystem,
        state: State,
        name: str
        ) -> None:
    assert_compatible(system, state.u, f'{name}.u')


def _mass_factor(system: AssembledSystem) -> spla.SuperLU:
    factor, _ = system.cached(('mass',), lambda: spla.splu(system.m_h.tocsc()))
    return factor


def mass_solve(
        system: AssembledSystem,
        rhs: np.ndarray
        ) -> np.ndarray:
    """
    Solves M_H w = rhs with the cached factorization of M_H.
    """
    factor = _mass_factor(system)
    rhs = np.asarray(rhs)
    solution = factor.solve(np.ascontiguousarray(rhs.real))
    if np.iscomplexobj(rhs):
        solution = solution + 1j * factor.solve(np.ascontiguousarray(rhs.imag))
    return solution


def schur_matrix(
        system: AssembledSystem,
        shift: complex
        ) -> sps.csc_matrix:
    """
    Gets S(λ) = K_tot + λ α M_g1 + λ² M_H.
    """
    matrix = (system.k_tot + (shift * system.alpha) * system.m_g1 + shift ** 2 * system.m_h).astype(complex)
    return matrix.tocsc()


class SchurFactor:
    """
    A sparse LU factorization of S(λ), also used for the conjugate-transposed system.
    """

    def __init__(
            self,
            shift: complex,
            matrix: sps.csc_matrix,
            lu: spla.SuperLU
            ) -> None:
        self._shift = shift
        self._matrix = matrix
        self._adjoint = matrix.conj().T.tocsc()
        self._lu = lu

    @property
    def shift(self) -> complex:
        return self._shift

    def system_matrix(
            self,
            adjoint: bool = False
            ) -> sps.csc_matrix:
        """
        Gets S(λ), or S(λ)ᴴ = S(λ̄) when adjoint is set.
        """
        matrix = self._adjoint if adjoint else self._matrix
        return matrix

    def solve(
            self,
            rhs: np.ndarray,
            adjoint: bool = False
            ) -> np.ndarray:
        """
        Solves S(λ) x = rhs, or S(λ)ᴴ x = rhs when adjoint is set, with up to two
        steps of iterative refinement.
        """
        trans = 'H' if adjoint else 'N'
        matrix = self.system_matrix(adjoint)
        rhs = np.asarray(rhs, dtype=complex)
        solution = self._lu.solve(rhs, trans=trans)
        target = 1e-15 * np.linalg.norm(rhs)
        for _ in range(2):
            correction = rhs - matrix @ solution
            if np.linalg.norm(correction) <= target:
                break
            solution = solution + self._lu.solve(correction, trans=trans)
        return solution


def _inverse_norm_estimate(
        lu: spla.SuperLU,
        size: int
        ) -> float:
    rng = np.random.default_rng(size)
    vector = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(3):
        image = lu.solve(vector)
        estimate = float(np.linalg.norm(image))
        if not math.isfinite(estimate) or estimate == 0.0:
            break
        vector = image / estimate
    return estimate


def _factorize(
        system: AssembledSystem,
        shift: complex
        ) -> SchurFactor:
    matrix = schur_matrix(system, shift)
    try:
        lu = spla.splu(matrix)
    except RuntimeError as error:
        raise AtEigenvalueError(shift, 'the Schur complement is exactly singular.', error) from error
    except (MemoryError, ValueError) as error:
        raise LinearSolverError(f'factorization of S({shift:.6g}) failed.', error) from error
    scale = float(abs(matrix).max())
    smallest_pivot = float(np.abs(lu.U.diagonal()).min())
    if smallest_pivot < SINGULAR_TOLERANCE * scale:
        raise AtEigenvalueError(shift, f'smallest pivot {smallest_pivot:.3e} below {SINGULAR_TOLERANCE:g} x {scale:.3e}.')
    inverse_norm = _inverse_norm_estimate(lu, matrix.shape[0])
    if not math.isfinite(inverse_norm) or inverse_norm * scale > 1.0 / SINGULAR_TOLERANCE:
        raise AtEigenvalueError(shift, f'condition estimate {inverse_norm * scale:.3e} exceeds {1.0 / SINGULAR_TOLERANCE:g}.')
    logger.debug('factored S(%s): %d non-zeros in L+U', shift, lu.L.nnz + lu.U.nnz)
    factor = SchurFactor(shift, matrix, lu)
    return factor


def schur_factor(
        system: AssembledSystem,
        shift: complex
        ) -> Tuple[SchurFactor, bool]:
    """
    Gets the factorization of S(λ), reusing the system's cache.

    Returns:
        The factorization and whether it was reused.

    Raises:
        AtEigenvalueError:
            S(λ) is numerically singular.
        LinearSolverError:
            The sparse factorization broke down.
    """
    shift = complex(shift)
    factor, reused = system.cached(('schur', shift), lambda: _factorize(system, shift))
    return factor, reused


def apply_generator(
        system: AssembledSystem,
        state: State
        ) -> State:
    """
    Applies 𝒜[u, v] = [-v, M_H⁻¹(K_tot u + α M_g1 v)].
    """
    _assert_state(system, state, 'state')
    rhs = system.k_tot @ state.u + system.alpha * (system.m_g1 @ state.v)
    try:
        velocity = mass_solve(system, rhs)
    except RuntimeError as error:
        raise LinearSolverError('M_H solve failed.', error) from error
    image = State(-state.v, velocity)
    return image


def energy_inner(
        system: AssembledSystem,
        first: State,
        second: State
        ) -> complex:
    """
    Gets (X1, X2) = u2ᴴ K_tot u1 + v2ᴴ M_H v1, conjugate-linear in the second argument.
    """
    assert_same_size(first.u, second.u, 'energy_inner')
    value = np.vdot(second.u, system.k_tot @ first.u) + np.vdot(second.v, system.m_h @ first.v)
    return complex(value)


def energy_norm(
        system: AssembledSystem,
        state: State
        ) -> float:
    norm = math.sqrt(max(energy_inner(system, state, state).real, 0.0))
    return norm


def graph_norm(
        system: AssembledSystem,
        state: State
        ) -> float:
    """
    Gets (‖X‖² + ‖𝒜X‖²)^½.
    """
    norm = math.hypot(energy_norm(system, state), energy_norm(system, apply_generator(system, state)))
    return norm


def dissipation(
        system: AssembledSystem,
        state: State
        ) -> float:
    """
    Gets the boundary dissipation rate α vᴴ M_g1 v.
    """
    rate = system.alpha * float(np.vdot(state.v, system.m_g1 @ state.v).real)
    return rate


def dissipation_residual(
        system: AssembledSystem,
        state: State
        ) -> float:
    """
    Measures the identity (𝒜X, X) = α ∫_Γ1 |v|² + 2i Im (u, v)_V.

    Returns:
        |lhs - rhs| / max(1, ‖X‖²); zero in exact arithmetic.
    """
    _assert_state(system, state, 'state')
    lhs = energy_inner(system, apply_generator(system, state), state)
    v_product = complex(np.vdot(state.v, system.k_tot @ state.u))
    rhs = dissipation(system, state) + 2j * v_product.imag
    scale = max(1.0, energy_norm(system, state) ** 2)
    residual = abs(lhs - rhs) / scale
    return residual


def _solve_shifted(
        system: AssembledSystem,
        shift: complex,
        data: State,
        adjoint: bool,
        tolerance: float
        ) -> ResolventSolve:
    _assert_state(system, data, 'F')
    factor, reused = schur_factor(system, shift)
    solve_shift = np.conj(shift) if adjoint else complex(shift)
    if adjoint:
        data = data.time_reversed()
    f, g = data.u, data.v
    rhs = system.m_h @ g + system.alpha * (system.m_g1 @ f) + solve_shift * (system.m_h @ f)
    position = factor.solve(rhs, adjoint=adjoint)
    solution = State(position, solve_shift * position - f)
    schur_residual = factor.system_matrix(adjoint) @ position - rhs
    residual = _relative_residual(system, solve_shift, solution, data, schur_residual)
    if residual > tolerance:
        raise LinearSolverError(
            f'resolvent residual {residual:.3e} at shift {shift:.6g} exceeds tolerance {tolerance:g}.')
    if adjoint:
        solution = solution.time_reversed()
    result = ResolventSolve(complex(shift), solution, residual, reused)
    return result


def _relative_residual(
        system: AssembledSystem,
        shift: complex,
        solution: State,
        data: State,
        schur_residual: np.ndarray
        ) -> float:
    data_norm = energy_norm(system, data)
    if data_norm == 0.0:
        return 0.0
    first = -solution.v + shift * solution.u - data.u
    # M_H times the velocity residual equals the Schur residual
    second = mass_solve(system, schur_residual)
    residual = energy_norm(system, State(first, second)) / data_norm
    return residual


def resolve(
        system: AssembledSystem,
        shift: complex,
        data: State,
        tolerance: float = RESOLVE_TOLERANCE
        ) -> ResolventSolve:
    """
    Solves (𝒜 + λ)X = F by eliminating the velocity.

    Remarks:
        With F = [f, g], the first row gives v = λu - f and the second row reduces to
        S(λ) u = M_H g + (α M_g1 + λ M_H) f. The factorization of S(λ) is cached per λ.

    Args:
        system:
            The assembled system.
        shift:
            The shift λ; must not be a discrete eigenvalue of -𝒜.
        data:
            The right-hand side F.
        tolerance:
            Largest accepted energy-norm relative residual.

    Raises:
        AtEigenvalueError:
            S(λ) is numerically singular.
        LinearSolverError:
            The factorization broke down or the residual exceeds the tolerance.
    """
    result = _solve_shifted(system, shift, data, False, tolerance)
    return result


def resolve_adjoint(
        system: AssembledSystem,
        shift: complex,
        data: State,
        tolerance: float = RESOLVE_TOLERANCE
        ) -> ResolventSolve:
    """
    Applies the energy adjoint of (𝒜 + λ)⁻¹.

    Remarks:
        The discrete generator satisfies 𝒜^⋆ = J𝒜J with J[u, v] = [u, -v], so the adjoint
        resolvent is J(𝒜 + λ̄)⁻¹J. S(λ̄) = S(λ)ᴴ, hence the factorization of S(λ) is reused.
    """
    result = _solve_shifted(system, shift, data, True, tolerance)
    return result


def project_h(
        system: AssembledSystem,
        g_bulk: np.ndarray,
        g_gamma0: np.ndarray
        ) -> np.ndarray:
    """
    Gets the nodal vector g with M_H g = M_bulk g1 + M_g0 g2.

    Remarks:
        This represents an element (g1, g2) of L²(Ω) × L²(Γ0) whose boundary component
        is not the trace of the bulk one. Only the Γ0 entries of g_gamma0 matter.
    """
    assert_compatible(system, g_bulk, 'g_bulk')
    assert_compatible(system, g_gamma0, 'g_gamma0')
    rhs = system.m_bulk @ np.asarray(g_bulk) + system.m_g0 @ np.asarray(g_gamma0)
    projection = mass_solve(system, rhs)
    return projection


def energy_operator_norm(
        system: AssembledSystem,
        apply: Callable[[State], State],
        apply_adjoint: Callable[[State], State],
        seed: int = 0,
        tolerance: float = 1e-8,
        max_iterations: int = 5000,
        start: Optional[State] = None
        ) -> OperatorNorm:
    """
    Estimates the energy operator norm of T by power iteration on T^⋆T.

    Args:
        system:
            Provides the energy inner product.
        apply:
            Applies T.
        apply_adjoint:
            Applies the energy adjoint T^⋆.
        seed:
            Seeds the random start vector.
        tolerance:
            Stop once ‖T^⋆T x - ρ x‖ <= tolerance ρ.
        max_iterations:
            Iteration cap.
        start:
            Optional start vector replacing the random one.

    Raises:
        ConvergenceError:
            The cap was reached; partial holds the last OperatorNorm estimate.
    """
    vector = start if start is not None else State.random(system.size, np.random.default_rng(seed))
    norm = energy_norm(system, vector)
    if norm == 0.0:
        raise InvalidArgumentError('the start vector of the power iteration is zero.')
    vector = vector / norm
    history: List[float] = []
    rayleigh = 0.0
    for iteration in range(1, max_iterations + 1):
        image = apply(vector)
        normal = apply_adjoint(image)
        rayleigh = energy_inner(system, normal, vector).real
        history.append(rayleigh)
        if rayleigh <= 0.0:
            return OperatorNorm(0.0, iteration, tuple(history))
        residual = energy_norm(system, normal - rayleigh * vector)
        if residual <= tolerance * rayleigh:
            logger.debug('power iteration converged in %d iterations', iteration)
            return OperatorNorm(math.sqrt(rayleigh), iteration, tuple(history))
        vector = normal / energy_norm(system, normal)
    partial = OperatorNorm(math.sqrt(max(rayleigh, 0.0)), max_iterations, tuple(history))
    raise ConvergenceError(f'power iteration did not converge in {max_iterations} iterations.', partial)
