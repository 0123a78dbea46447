"""
Errors raised by the numerical modules.
"""

from typing import Any, Optional
from ._exceptions import LabError


class InvalidArgumentError(LabError):
    """
    A parameter violates the precondition of an operation.
    """

    exit_status = 2


class MeshError(LabError):
    """
    A mesh breaks one of its topological invariants.
    """


class AssemblyError(LabError):
    """
    A finite element could not be integrated (zero or negative measure).
    """


class EvaluationError(LabError):
    """
    A user supplied field callback raised or returned non-finite values.
    """


class ArtifactError(LabError):
    """
    An output file or directory could not be written.
    """


class LinearSolverError(LabError):
    """
    A sparse factorization broke down or a solve missed its residual tolerance.
    """


class AtEigenvalueError(LinearSolverError):
    """
    The shifted system is numerically singular: the shift is a discrete eigenvalue.
    """

    def __init__(
            self,
            shift: complex,
            message: str,
            inner_exception: Optional[Exception] = None
            ) -> None:
        super().__init__(f'shift {shift:.6g} is a discrete eigenvalue: {message}', inner_exception)
        self._shift = shift

    @property
    def shift(self) -> complex:
        """
        Gets the shift at which the system became singular.
        """
        return self._shift


class ConvergenceError(LabError):
    """
    An iteration reached its cap before meeting its tolerance.
    """

    def __init__(
            self,
            message: str,
            partial: Any = None,
            inner_exception: Optional[Exception] = None
            ) -> None:
        super().__init__(message, inner_exception)
        self._partial = partial

    @property
    def partial(self) -> Any:
        """
        Gets the results computed before the iteration stopped, if any.
        """
        return self._partial
