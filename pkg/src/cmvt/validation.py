"""Input validation helpers shared by the data structures and estimators."""

import numpy as np


def as_float_array(x, name, ndim=None):
    """Coerce to a float array, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_positive(arr, name):
    if np.any(np.asarray(arr) <= 0.0):
        raise ValueError(f"{name} must be strictly positive")


def check_square(a, name):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")


def check_symmetric(a, name, tol=1e-8):
    check_square(a, name)
    a = np.asarray(a)
    if a.size:
        scale = max(1.0, float(np.max(np.abs(a))))
        if float(np.max(np.abs(a - a.T))) > tol * scale:
            raise ValueError(f"{name} must be symmetric")


def as_time_series(x, name):
    """Coerce a (rows = time) array to 2-D float, promoting a single series."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1- or 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr
