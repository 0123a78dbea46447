"""
Contains common precondition wrappers.
"""

import math
from typing import Sized
from .errors import InvalidArgumentError


def assert_finite(
        value: float,
        name: str
        ) -> None:
    """
    Asserts that the value is a finite real number.

    Raises:
        InvalidArgumentError: The value is NaN or infinite.
    """
    if not math.isfinite(value):
        raise InvalidArgumentError(f'{name} must be finite, got {value}.')


def assert_positive(
        value: float,
        name: str
        ) -> None:
    """
    Asserts that the value is finite and strictly positive.

    Raises:
        InvalidArgumentError: The value is not strictly positive.
    """
    assert_finite(value, name)
    if value <= 0:
        raise InvalidArgumentError(f'{name} must be > 0, got {value}.')


def assert_non_negative(
        value: float,
        name: str
        ) -> None:
    """
    Asserts that the value is finite and not negative.

    Raises:
        InvalidArgumentError: The value is negative.
    """
    assert_finite(value, name)
    if value < 0:
        raise InvalidArgumentError(f'{name} must be >= 0, got {value}.')


def assert_at_least(
        value: float,
        minimum: float,
        name: str
        ) -> None:
    """
    Asserts that the value is not below the minimum.

    Raises:
        InvalidArgumentError: The value is below the minimum.
    """
    assert_finite(value, name)
    if value < minimum:
        raise InvalidArgumentError(f'{name} must be >= {minimum}, got {value}.')


def assert_less(
        lower: float,
        upper: float,
        lower_name: str,
        upper_name: str
        ) -> None:
    """
    Asserts that the lower value is strictly below the upper value.

    Raises:
        InvalidArgumentError: The values are not strictly ordered.
    """
    if not lower < upper:
        raise InvalidArgumentError(
            f'{lower_name} must be < {upper_name}, got {lower_name}={lower}, {upper_name}={upper}.')


def assert_same_size(
        first: Sized,
        second: Sized,
        name: str
        ) -> None:
    """
    Asserts that two vectors have the same length.

    Raises:
        InvalidArgumentError: The lengths differ.
    """
    if len(first) != len(second):
        raise InvalidArgumentError(f'{name}: size mismatch, {len(first)} != {len(second)}.')
