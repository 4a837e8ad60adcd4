"""Small input checks shared by the public functions and estimators."""

from __future__ import annotations

import numpy as np


def check_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def check_symmetric(a, name: str = "matrix", rtol: float = 1e-12) -> np.ndarray:
    a = check_square(a, name)
    scale = np.abs(a).max() if a.size else 0.0
    if scale and np.abs(a - a.T).max() > rtol * scale:
        raise ValueError(f"{name} is not symmetric within relative tolerance {rtol}")
    return a


def check_1d(x, name: str = "array", min_size: int = 1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if x.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} entries, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_increasing(x, name: str = "grid") -> np.ndarray:
    x = check_1d(x, name)
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return x
