"""Input validation helpers shared by the geometry modules."""
from __future__ import annotations

import numpy as np

from .quat import Quaternion


def as_vec4(x) -> np.ndarray:
    if isinstance(x, Quaternion):
        return x.as_array()
    arr = np.asarray(x, dtype=float)
    if arr.shape != (4,):
        raise ValueError(f"expected a 4-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("4-vector has non-finite entries")
    return arr


def check_points(X, n_features: int, name: str = "X") -> np.ndarray:
    """Return ``X`` as a float (n, n_features) array, or raise ValueError.

    A single point of shape ``(n_features,)`` is promoted to one row.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != n_features:
        raise ValueError(f"{name} must have shape (n, {n_features}), got {np.shape(X)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def check_points_s3(X, tol: float = 1e-9, name: str = "X") -> np.ndarray:
    """Like :func:`check_points` for 4-vectors, also requiring unit length."""
    arr = check_points(X, 4, name)
    drift = np.abs(np.einsum("ij,ij->i", arr, arr) - 1.0)
    if arr.size and drift.max() > tol:
        raise ValueError(f"{name} has points off S^3 (max | |x|^2 - 1 | = {drift.max():.3e})")
    return arr
