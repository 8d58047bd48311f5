"""Input checks shared by the public functions and estimators."""

from __future__ import annotations

import numpy as np


class InputError(ValueError):
    """Raised when arguments violate a documented precondition."""


def as_points(points, name="points", dim=None, allow_empty=False) -> np.ndarray:
    """Return ``points`` as a C-contiguous float64 (N, D) array."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim == 1 and dim is None:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a 2D array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"{name} must have {dim} columns, got {arr.shape[1]}")
    if not allow_empty and arr.shape[0] == 0:
        raise InputError(f"{name} is empty")
    if arr.shape[1] == 0:
        raise InputError(f"{name} must have at least one column")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def check_weight(w) -> float:
    w = float(w)
    if not (0.0 <= w < 1.0):
        raise InputError(f"weight must lie in [0, 1), got {w}")
    return w


def check_count(m, n) -> int:
    if int(m) != m:
        raise InputError(f"count must be an integer, got {m}")
    m = int(m)
    if m < 1:
        raise InputError(f"count must be >= 1, got {m}")
    if m > n:
        raise InputError(f"count {m} exceeds the number of points {n}")
    return m


def check_start(start, n) -> int:
    start = int(start)
    if not (0 <= start < n):
        raise InputError(f"start index {start} outside [0, {n})")
    return start
