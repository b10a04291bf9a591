"""Input checks shared by the numerical modules."""

from __future__ import annotations

import math
from numbers import Real

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """Raised when a quadrature or extrapolation step cannot be carried out reliably."""


def check_positive_finite(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    x = float(value)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return x


def check_grid(grid, name: str = "grid") -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise DomainError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(g)) or np.any(g <= 0.0):
        raise DomainError(f"{name} must contain finite positive values")
    if g.size > 1 and np.any(np.diff(g) <= 0.0):
        raise DomainError(f"{name} must be strictly increasing")
    return g


def check_samples(values, size: int, name: str) -> np.ndarray:
    a = np.asarray(values, dtype=float)
    if a.shape != (size,):
        raise DomainError(f"{name} must have shape ({size},), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a
