"""
Eigenvalues of the discrete generator and energy-norm resolvent sweeps along iℝ.

An eigenpair 𝒜X = μX has X = [u, -μu] with the quadratic pencil
(μ² M_H - μ α M_g1 + K_tot) u = 0; for α > 0 every μ lies in the open right half-plane.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple
import numpy as np
import scipy.linalg
import scipy.sparse as sps
from scipy import signal
from scipy.sparse import linalg as spla
from ._asserts import assert_at_least, assert_finite, assert_less
from ._iterables import map_async, pairwise_differences
from .assembly import AssembledSystem
from .errors import ConvergenceError, InvalidArgumentError
from .geometry import Mesh
from .operator import (
    State, energy_operator_norm, mass_solve, resolve, resolve_adjoint, schur_factor)

logger = logging.getLogger(__name__)

DENSE_THRESHOLD = 600


@dataclass(frozen=True)
class SpectrumResult:
    """
    Eigenvalues of 𝒜 nearest a shift, with their quadratic pencil residuals.
    """
    eigenvalues: np.ndarray
    residuals: np.ndarray
    method: str

    @property
    def min_real_part(self) -> float:
        value = float(np.min(self.eigenvalues.real)) if len(self.eigenvalues) else math.nan
        return value


@dataclass(frozen=True)
class ResolventSample:
    """
    ‖(𝒜 + iω)⁻¹‖ in the energy operator norm at one frequency.
    """
    omega: float
    norm: float
    scaled: float
    iterations: int
    history: Tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class SweepResult:
    """
    A log-spaced resolvent sweep with the growth exponent fitted over its peaks.
    """
    samples: Tuple[ResolventSample, ...]
    slope: float
    sup_scaled: float
    peaks: Tuple[int, ...]
    omega_max: float

    @property
    def omegas(self) -> np.ndarray:
        return np.array([sample.omega for sample in self.samples])

    @property
    def norms(self) -> np.ndarray:
        return np.array([sample.norm for sample in self.samples])


def generator_pencil(system: AssembledSystem) -> Tuple[sps.csc_matrix, sps.csc_matrix]:
    """
    Gets the companion pair (L, N) with L X = μ N X exactly when 𝒜X = μX.

    Remarks:
        L = [[0, -I], [K_tot, α M_g1]] and N = diag(I, M_H).
    """
    identity = sps.identity(system.size, format='csr')
    stiffness = sps.bmat([[None, -identity], [system.k_tot, system.alpha * system.m_g1]], format='csc')
    mass = sps.block_diag([identity, system.m_h], format='csc')
    return stiffness.astype(complex), mass.astype(complex)


def pencil_residual(
        system: AssembledSystem,
        eigenvalue: complex,
        position: np.ndarray
        ) -> float:
    """
    Gets ‖(μ² M_H - μ α M_g1 + K_tot) u‖ / ‖u‖.
    """
    image = (eigenvalue ** 2 * (system.m_h @ position)
             - eigenvalue * system.alpha * (system.m_g1 @ position)
             + system.k_tot @ position)
    residual = float(np.linalg.norm(image) / np.linalg.norm(position))
    return residual


def frequency_ceiling(mesh: Mesh) -> float:
    """
    Gets 1 / h_min, the largest frequency the mesh resolves.
    """
    ceiling = 1.0 / mesh.h_min
    return ceiling


def _nearest(
        values: np.ndarray,
        vectors: np.ndarray,
        shift: complex,
        count: int
        ) -> Tuple[np.ndarray, np.ndarray]:
    finite = np.isfinite(values)
    values, vectors = values[finite], vectors[:, finite]
    order = np.argsort(np.abs(values - shift), kind='stable')[:count]
    return values[order], vectors[:, order]


def _dense_eigs(
        system: AssembledSystem,
        shift: complex,
        count: int
        ) -> Tuple[np.ndarray, np.ndarray]:
    stiffness, mass = generator_pencil(system)
    values, vectors = scipy.linalg.eig(stiffness.toarray(), mass.toarray())
    nearest = _nearest(values, vectors, shift, count)
    return nearest


def _sparse_eigs(
        system: AssembledSystem,
        shift: complex,
        count: int,
        max_iterations: int
        ) -> Tuple[np.ndarray, np.ndarray]:
    size = system.size
    stiffness, mass = generator_pencil(system)

    def shifted_inverse(vector: np.ndarray) -> np.ndarray:
        # (L - σN)⁻¹ b = (𝒜 - σ)⁻¹ N⁻¹ b
        vector = np.asarray(vector).ravel()
        data = State(vector[:size], mass_solve(system, vector[size:]))
        solved = resolve(system, -shift, data).state
        return np.concatenate([solved.u, solved.v])

    operator = spla.LinearOperator((2 * size, 2 * size), matvec=shifted_inverse, dtype=complex)
    try:
        values, vectors = spla.eigs(stiffness, k=count, M=mass, sigma=shift, OPinv=operator,
                                    maxiter=max_iterations)
    except spla.ArpackNoConvergence as error:
        values, vectors = _nearest(error.eigenvalues, error.eigenvectors, shift, count)
        residuals = np.array([pencil_residual(system, value, vectors[:size, index])
                              for index, value in enumerate(values)])
        partial = SpectrumResult(values, residuals, 'sparse')
        raise ConvergenceError(
            f'shift-invert iteration found {len(values)} of {count} eigenvalues.', partial, error) from error
    nearest = _nearest(values, vectors, shift, count)
    return nearest


def _log_real_part_trend(eigenvalues: np.ndarray) -> None:
    ordered = eigenvalues[np.argsort(np.abs(eigenvalues.imag))]
    increases = sum(1 for change in pairwise_differences(ordered.real) if change > 0)
    logger.info('spectrum: min Re mu = %.3e; Re mu increases %d times along |Im mu| over %d eigenvalues',
                float(ordered.real.min()), increases, len(ordered))


def quadratic_eigs(
        system: AssembledSystem,
        count: int,
        shift: complex,
        dense_threshold: int = DENSE_THRESHOLD,
        tolerance: float = 1e-8,
        max_iterations: int = 10000
        ) -> SpectrumResult:
    """
    Computes the eigenvalues of 𝒜 nearest the shift.

    Remarks:
        Meshes below dense_threshold nodes use dense QZ on the companion pair; larger
        meshes use ARPACK shift-invert with the Schur-complement resolvent as the inverse.

    Args:
        system:
            The assembled system.
        count:
            Number of eigenvalues, >= 1.
        shift:
            Target point; must not be an eigenvalue.
        dense_threshold:
            Node count from which the sparse path is used.
        tolerance:
            Largest accepted pencil residual.
        max_iterations:
            ARPACK iteration cap.

    Raises:
        AtEigenvalueError:
            The shift is an eigenvalue.
        ConvergenceError:
            ARPACK stopped early, or a residual exceeds the tolerance; partial holds
            the SpectrumResult computed so far.
    """
    assert_at_least(count, 1, 'count')
    count = int(count)
    size = system.size
    if count > 2 * size - 2:
        raise InvalidArgumentError(f'count must be at most {2 * size - 2} on this mesh, got {count}.')
    schur_factor(system, -shift)
    if size < dense_threshold:
        method = 'dense'
        values, vectors = _dense_eigs(system, shift, count)
    else:
        method = 'sparse'
        values, vectors = _sparse_eigs(system, shift, count, max_iterations)
    residuals = np.array([pencil_residual(system, value, vectors[:size, index])
                          for index, value in enumerate(values)])
    result = SpectrumResult(values, residuals, method)
    _log_real_part_trend(values)
    if np.any(residuals > tolerance):
        raise ConvergenceError(
            f'pencil residual {residuals.max():.3e} exceeds tolerance {tolerance:g}.', result)
    return result


def resolvent_norm(
        system: AssembledSystem,
        omega: float,
        seed: int = 0,
        tolerance: float = 1e-8,
        max_iterations: int = 5000
        ) -> ResolventSample:
    """
    Computes ‖(𝒜 + iω)⁻¹‖ in the energy operator norm.

    Remarks:
        Power iteration on R^⋆R where R is resolve(iω, ·) and R^⋆ the energy adjoint,
        which solves the conjugate-transposed Schur system with the same factorization.

    Raises:
        AtEigenvalueError:
            iω is a discrete eigenvalue.
        ConvergenceError:
            The power iteration reached its cap; partial holds the last sample.
    """
    assert_finite(omega, 'omega')
    shift = 1j * omega
    try:
        estimate = energy_operator_norm(
            system,
            lambda state: resolve(system, shift, state).state,
            lambda state: resolve_adjoint(system, shift, state).state,
            seed, tolerance, max_iterations)
    except ConvergenceError as error:
        last = error.partial
        partial = ResolventSample(omega, last.norm, _scaled(last.norm, omega), last.iterations, last.history)
        raise ConvergenceError(f'resolvent norm at omega={omega:.6g} did not converge.', partial, error) from error
    sample = ResolventSample(omega, estimate.norm, _scaled(estimate.norm, omega), estimate.iterations,
                             estimate.history)
    logger.debug('omega=%.6g: |R| = %.6g after %d iterations', omega, sample.norm, sample.iterations)
    return sample


def _scaled(
        norm: float,
        omega: float
        ) -> float:
    scaled = norm / omega ** 2 if omega != 0 else math.inf
    return scaled


def resolvent_sweep(
        system: AssembledSystem,
        omega_min: float,
        omega_max: float,
        n_samples: int,
        jobs: int = 1,
        seed: int = 0,
        tolerance: float = 1e-8,
        enforce_ceiling: bool = True
        ) -> SweepResult:
    """
    Samples the resolvent norm at log-spaced frequencies and fits its growth.

    Remarks:
        The exponent is the least-squares slope of log norm against log ω over the
        interior local maxima of the sampled curve; with fewer than two maxima every
        sample is used. omega_max is clamped to the mesh ceiling 1/h_min unless
        enforce_ceiling is unset. Sample i uses seed + i, so results do not depend on jobs.

    Raises:
        InvalidArgumentError:
            The range or sample count is invalid.
        AtEigenvalueError:
            A sampled frequency is a discrete eigenvalue (the sweep aborts).
    """
    assert_at_least(omega_min, 1.0, 'omega_min')
    assert_less(omega_min, omega_max, 'omega_min', 'omega_max')
    assert_at_least(n_samples, 8, 'n_samples')
    ceiling = frequency_ceiling(system.mesh)
    if enforce_ceiling and omega_max > ceiling:
        logger.warning('omega_max %.4g clamped to the mesh ceiling 1/h = %.4g', omega_max, ceiling)
        omega_max = ceiling
        assert_less(omega_min, omega_max, 'omega_min', 'omega_max (clamped to 1/h)')
    omegas = np.geomspace(omega_min, omega_max, int(n_samples))
    samples = map_async(
        list(enumerate(omegas)),
        lambda item: resolvent_norm(system, float(item[1]), seed + item[0], tolerance),
        jobs)
    norms = np.array([sample.norm for sample in samples])
    peaks, _ = signal.find_peaks(norms)
    fitted = peaks
    if len(peaks) < 2:
        logger.warning('sweep has %d interior peaks; fitting the slope over all samples', len(peaks))
        fitted = np.arange(len(samples))
    slope = float(np.polyfit(np.log(omegas[fitted]), np.log(norms[fitted]), 1)[0])
    sup_scaled = max(sample.scaled for sample in samples)
    result = SweepResult(tuple(samples), slope, sup_scaled, tuple(int(peak) for peak in peaks), float(omega_max))
    logger.info('sweep [%g, %g] x %d: slope %.3f over %d points, sup |R|/omega^2 = %.4g',
                omega_min, omega_max, len(samples), slope, len(fitted), sup_scaled)
    return result
