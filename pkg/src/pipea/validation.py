"""Small input-validation helpers used across the pipeline modules."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ParameterError


def as_dense(m, name="matrix") -> np.ndarray:
    """Coerce to a 2-d float ndarray, rejecting non-finite entries."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def check_same_shape(a, b, name_a="a", name_b="b") -> None:
    if a.shape != b.shape:
        raise ParameterError(
            f"shape mismatch: {name_a} is {a.shape}, {name_b} is {b.shape}"
        )


def check_nonnegative(arr, name="matrix") -> None:
    data = arr.data if sp.issparse(arr) else arr
    if data.size and np.min(data) < 0:
        raise DomainError(f"{name} must be entrywise non-negative")


def check_fraction(value, name, low=0.0, high=1.0, low_open=False, high_open=False):
    """Validate a scalar against an interval, open or closed per side."""
    ok_low = value > low if low_open else value >= low
    ok_high = value < high if high_open else value <= high
    if not (ok_low and ok_high):
        raise ParameterError(
            f"{name}={value!r} outside required range "
            f"{'(' if low_open else '['}{low}, {high}{')' if high_open else ']'}"
        )
    return value


def check_positive_int(value, name, minimum=1) -> int:
    if int(value) != value or value < minimum:
        raise ParameterError(f"{name}={value!r} must be an integer >= {minimum}")
    return int(value)
