"""Primitives on the real coordinate space R^n.

Vectors are 1-D ``float64`` numpy arrays. Every function returns a fresh
array and never writes into its arguments.
"""

import numpy as np

from .exceptions import UsageError

__all__ = ["as_vector", "inner", "norm", "norm_sq", "axpby"]


def as_vector(a, name="vector"):
    """Return `a` as a finite, non-empty 1-D float array (copied)."""
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise UsageError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    return arr


def _check_dims(a, b):
    if np.shape(a) != np.shape(b):
        raise UsageError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


def inner(a, b):
    """Euclidean inner product ``sum(a_i * b_i)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_dims(a, b)
    return float(np.dot(a, b))


def norm(a):
    """Euclidean norm ``sqrt(inner(a, a))``."""
    return float(np.sqrt(inner(a, a)))


def norm_sq(a):
    a = np.asarray(a, dtype=float)
    return float(np.dot(a, a))


def axpby(alpha, a, beta, b):
    """Return the linear combination ``alpha * a + beta * b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_dims(a, b)
    return alpha * a + beta * b
