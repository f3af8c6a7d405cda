"""Small argument checks shared across modules."""

import math

import numpy as np

from .exceptions import ValidationError


def check_finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}", field=name)
    return value


def check_positive(value, name, allow_zero=False):
    value = check_finite(value, name)
    if value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value!r}", field=name)
    return value


def check_nonnegative(value, name):
    return check_positive(value, name, allow_zero=True)


def check_nonnegative_array(values, name):
    """Return ``values`` as a float array after checking it is finite and >= 0."""
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite", field=name)
    if np.any(arr < 0):
        raise ValidationError(f"{name} must be >= 0", field=name)
    return arr
