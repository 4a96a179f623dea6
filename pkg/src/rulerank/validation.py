"""Input validation helpers shared by the estimator-facing API."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def as_feature_matrix(X, *, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float array with at least one row and column."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_aligned(items: Sequence, n: int, *, name: str = "rules") -> None:
    if len(items) != n:
        raise ValueError(f"{name} has {len(items)} entries, expected {n}")


def check_n_features(arr: np.ndarray, expected: int, *, name: str = "X") -> None:
    if arr.shape[1] != expected:
        raise ValueError(
            f"{name} has {arr.shape[1]} features, but this estimator was fitted with {expected}"
        )
