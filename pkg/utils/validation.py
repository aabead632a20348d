"""Input validation and error types for eigenbound.

Every public operation funnels its arguments through these helpers, so a bad
radius, fraction or dimension surfaces as a ``ValidationError`` naming the
offending field instead of a NaN deep inside a computation.
"""
import math

import numpy as np

UNIT_TOLERANCE = 1e-12


class ValidationError(ValueError):
    """Raised when a parameter is out of range or malformed."""
    pass


class DomainError(ValueError):
    """Raised when a point that must lie in the domain does not."""
    pass


class UnsupportedError(Exception):
    """Raised when an operation is not available for the given domain or kind."""
    pass


class NumericError(ArithmeticError):
    """Raised when an iterative or root-finding procedure fails to converge."""
    pass


def validate_positive(value, field_name: str = 'value') -> float:
    """Validate and convert a strictly positive finite number.

    Args:
        value: Number (int, float or numeric string)
        field_name: Name of the field for error messages

    Returns:
        Validated value as float

    Raises:
        ValidationError: If value is not a positive finite number
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{field_name} must be a number') from None

    if not math.isfinite(value) or value <= 0:
        raise ValidationError(f'{field_name} must be positive and finite, got {value}')

    return value


def validate_nonnegative(value, field_name: str = 'value') -> float:
    """Validate and convert a nonnegative finite number."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{field_name} must be a number') from None

    if not math.isfinite(value) or value < 0:
        raise ValidationError(f'{field_name} must be nonnegative and finite, got {value}')

    return value


def validate_fraction(value, field_name: str = 'fraction', *,
                      allow_zero: bool = True, allow_one: bool = True) -> float:
    """Validate a volume fraction in [0, 1].

    Args:
        value: Fraction value
        field_name: Name of the field for error messages
        allow_zero: Whether 0 is admissible
        allow_one: Whether 1 is admissible

    Returns:
        Validated fraction as float

    Raises:
        ValidationError: If the fraction is outside the admissible interval
    """
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{field_name} must be a number') from None

    if math.isnan(value) or value < 0 or value > 1:
        raise ValidationError(f'{field_name} must lie in [0, 1], got {value}')
    if value == 0 and not allow_zero:
        raise ValidationError(f'{field_name} must be positive')
    if value == 1 and not allow_one:
        raise ValidationError(f'{field_name} must be smaller than 1')

    return value


def validate_positive_int(value, field_name: str = 'value', minimum: int = 1) -> int:
    """Validate an integer that is at least ``minimum``."""
    if isinstance(value, bool):
        raise ValidationError(f'{field_name} must be an integer')
    try:
        as_int = int(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{field_name} must be an integer') from None

    if as_int != value and not (isinstance(value, str) and value.strip() == str(as_int)):
        raise ValidationError(f'{field_name} must be an integer, got {value}')
    if as_int < minimum:
        raise ValidationError(f'{field_name} must be at least {minimum}, got {as_int}')

    return as_int


def validate_dimension(d, minimum: int = 2) -> int:
    """Validate a space dimension."""
    return validate_positive_int(d, 'dimension', minimum=minimum)


def validate_point(x, dim: int | None = None, field_name: str = 'point') -> np.ndarray:
    """Validate a finite point, optionally of a given dimension.

    Args:
        x: Coordinates (sequence or array)
        dim: Expected dimension, or None to accept any
        field_name: Name of the field for error messages

    Returns:
        Point as a 1-D float array

    Raises:
        ValidationError: If the point is not finite or has the wrong dimension
    """
    try:
        point = np.asarray(x, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise ValidationError(f'{field_name} must be a sequence of numbers') from None

    if point.size == 0 or not np.all(np.isfinite(point)):
        raise ValidationError(f'{field_name} must be finite, got {x}')
    if dim is not None and point.size != dim:
        raise ValidationError(f'{field_name} must have dimension {dim}, got {point.size}')

    return point


def validate_unit_vector(omega, dim: int | None = None, field_name: str = 'direction') -> np.ndarray:
    """Validate a unit vector (|omega| = 1 within 1e-12)."""
    vector = validate_point(omega, dim, field_name)
    norm = float(np.linalg.norm(vector))
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise ValidationError(f'{field_name} must have unit length, got |{field_name}| = {norm}')
    return vector
