"""Input validation helpers for array-facing APIs."""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError


def as_float_array(x, name: str = "x", ndim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a float64 ndarray and optionally enforce its rank."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeMismatchError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_profile_matrix(X, name: str = "X") -> np.ndarray:
    """Validate a batch of range profiles: 2D, finite, non-negative amplitudes."""
    arr = as_float_array(X, name=name, ndim=2)
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeMismatchError(f"{name} must be non-empty, got shape {arr.shape}")
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative amplitudes")
    return arr


def check_lengths_match(a, b, names: str = "a, b") -> None:
    if len(a) != len(b):
        raise ShapeMismatchError(f"{names} must have equal length, got {len(a)} and {len(b)}")
