"""Dense vector helpers and projections onto simple closed convex sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Raised when two vectors (or a vector and a set) disagree in size."""


def as_vector(x, name: str = "x") -> np.ndarray:
    """Return ``x`` as a contiguous 1-D float64 array with finite entries."""
    v = np.ascontiguousarray(np.asarray(x, dtype=np.float64).ravel())
    if v.size == 0:
        raise DimensionError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains NaN or Inf")
    return v


def _check_same(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")


def inner(x, y) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    _check_same(x, y)
    return float(np.dot(x, y))


def norm(x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(np.sqrt(np.dot(x, x)))


def sqnorm(x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return float(np.dot(x, x))


class FeasibleSet:
    """Closed convex set ``C`` with an exact Euclidean projection."""

    def project(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class WholeSpace(FeasibleSet):
    def project(self, z):
        return np.asarray(z, dtype=np.float64)

    def contains(self, x, tol=1e-12):
        return True


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64).ravel()
        hi = np.asarray(self.upper, dtype=np.float64).ravel()
        _check_same(lo, hi)
        if np.any(lo > hi):
            raise ValueError("Box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def project(self, z):
        z = np.asarray(z, dtype=np.float64)
        _check_same(z.ravel(), self.lower)
        return np.clip(z, self.lower, self.upper)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


@dataclass(frozen=True, eq=False)
class Ball(FeasibleSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("Ball radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=np.float64).ravel())

    def project(self, z):
        z = np.asarray(z, dtype=np.float64)
        _check_same(z.ravel(), self.center)
        d = z - self.center
        dist = norm(d)
        # points already inside (up to roundoff) are returned untouched so that
        # projecting twice is bit-for-bit idempotent
        if dist <= self.radius * (1.0 + 1e-12):
            return z
        return self.center + d * (self.radius / dist)

    def contains(self, x, tol=1e-12):
        return norm(np.asarray(x, dtype=np.float64) - self.center) <= self.radius + tol


def project(C: FeasibleSet, z) -> np.ndarray:
    """Nearest point of ``C`` to ``z``."""
    return C.project(np.asarray(z, dtype=np.float64))
