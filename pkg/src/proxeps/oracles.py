"""Function oracles: values, subgradients and certified epsilon-subgradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionError, norm
from .operators import (
    LinearOperator,
    MatrixOperator,
    discrete_gradient,
    gradient_adjoint,
    power_norm_sq,
)


class InvalidCertificateError(ValueError):
    """A claimed (epsilon-)subgradient fails its membership test."""


class FunctionOracle:
    """Convex function ``F`` with first-order information.

    Subclasses implement ``value`` and ``subgradient``. Smooth functions set
    ``is_smooth`` and ``lipschitz`` and implement ``gradient``.
    """

    is_smooth = False
    lipschitz: float | None = None
    #: bound on the Euclidean norm of every epsilon-subgradient, if one exists
    subgradient_bound: float | None = None

    def value(self, x) -> float:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return self.value(x)

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        if not self.is_smooth:
            raise TypeError(f"{type(self).__name__} is not differentiable")
        return self.subgradient(x)

    def eps_subgradient(self, x, eps: float, rng=None) -> np.ndarray:
        """Return some ``u`` in the eps-subdifferential at ``x``.

        The default returns an exact subgradient, which belongs to every
        eps-subdifferential.
        """
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        return self.subgradient(x)

    def is_eps_subgradient(self, x, u, eps: float, tol: float = 1e-10) -> bool | None:
        """Closed-form membership test, or ``None`` when unavailable."""
        return None


class SumOracle(FunctionOracle):
    """Pointwise sum ``f + g``."""

    def __init__(self, f: FunctionOracle, g: FunctionOracle):
        self.f, self.g = f, g
        self.is_smooth = f.is_smooth and g.is_smooth
        if self.is_smooth and f.lipschitz is not None and g.lipschitz is not None:
            self.lipschitz = f.lipschitz + g.lipschitz

    def value(self, x):
        return self.f.value(x) + self.g.value(x)

    def subgradient(self, x):
        return self.f.subgradient(x) + self.g.subgradient(x)


class ZeroFunction(FunctionOracle):
    is_smooth = True
    lipschitz = 0.0
    subgradient_bound = 0.0

    def value(self, x):
        return 0.0

    def subgradient(self, x):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def prox(self, alpha, z):
        return np.asarray(z, dtype=np.float64).copy()

    def closest_subgradient(self, x, target):
        return np.zeros_like(np.asarray(x, dtype=np.float64))

    def is_eps_subgradient(self, x, u, eps, tol=1e-10):
        return bool(np.all(np.abs(u) <= tol))


class L1Norm(FunctionOracle):
    """``scale * ||x||_1``."""

    def __init__(self, scale: float = 1.0, dim: int | None = None):
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.dim = dim
        if dim is not None:
            self.subgradient_bound = self.scale * np.sqrt(dim)

    def value(self, x):
        return self.scale * float(np.sum(np.abs(x)))

    def subgradient(self, x):
        return self.scale * np.sign(np.asarray(x, dtype=np.float64))

    def closest_subgradient(self, x, target):
        """Element of the subdifferential at ``x`` nearest to ``target``."""
        x = np.asarray(x, dtype=np.float64)
        s = self.scale
        return np.where(x != 0.0, s * np.sign(x), np.clip(target, -s, s))

    def prox(self, alpha, z):
        return prox_l1(alpha * self.scale, z)

    def eps_subgradient(self, x, eps, rng=None):
        """Sample ``u`` coordinatewise from per-coordinate eps_i-subdifferentials.

        The budget ``eps`` is split at random (``sum eps_i = eps``) and each
        ``u_i`` is drawn uniformly from the interval of ``scale*|.|`` at
        ``x_i`` with tolerance ``eps_i``.
        """
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        x = np.asarray(x, dtype=np.float64)
        if eps == 0 or rng is None:
            return self.subgradient(x)
        rng = np.random.default_rng(rng)
        parts = eps * rng.dirichlet(np.ones(x.size))
        u = np.empty_like(x)
        for i, (t, e) in enumerate(zip(x, parts)):
            lo, hi = eps_subdiff_interval_abs(t, e / self.scale)
            u[i] = self.scale * rng.uniform(lo, hi)
        return u

    def is_eps_subgradient(self, x, u, eps, tol=1e-10):
        # v in d_eps ||.||_1(x)  <=>  ||v||_inf <= 1  and  ||x||_1 - <v, x> <= eps
        x = np.asarray(x, dtype=np.float64)
        v = np.asarray(u, dtype=np.float64) / self.scale
        if np.any(np.abs(v) > 1.0 + tol):
            return False
        gap = self.scale * (np.sum(np.abs(x)) - np.dot(v, x))
        return bool(gap <= eps + tol * max(1.0, self.scale * np.sum(np.abs(x))))


class LeastSquares(FunctionOracle):
    """``0.5 * ||A x - b||^2`` for a linear operator (or matrix) ``A``."""

    is_smooth = True

    def __init__(self, A, b, lipschitz: float | None = None):
        if not isinstance(A, LinearOperator):
            A = MatrixOperator(A)
        self.A = A
        self.b = np.asarray(b, dtype=np.float64).ravel()
        if self.b.size != A.out_size:
            raise DimensionError("b does not match the range of A")
        if lipschitz is not None:
            self.lipschitz = float(lipschitz)
        elif isinstance(A, MatrixOperator) and max(A.matrix.shape) <= 4000:
            # power iteration can stop below the top eigenvalue; the SVD cannot
            self.lipschitz = float(np.linalg.norm(A.matrix, 2)) ** 2
        else:
            self.lipschitz = power_norm_sq(A)

    def residual(self, x):
        return self.A.apply(x) - self.b

    def value(self, x):
        r = self.residual(x)
        return 0.5 * float(np.dot(r, r))

    def subgradient(self, x):
        return self.A.adjoint(self.residual(x))

    def eps_subgradient(self, x, eps, rng=None):
        """``grad f(x) + A^T s`` with ``0.5 ||s||^2 <= eps``.

        For any h: f(x+h) - f(x) - <u, h> = 0.5||Ah||^2 - <s, Ah> >= -0.5||s||^2.
        """
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        g = self.subgradient(x)
        if eps == 0 or rng is None:
            return g
        rng = np.random.default_rng(rng)
        d = rng.standard_normal(self.A.out_size)
        d *= np.sqrt(2.0 * eps) * rng.uniform() / norm(d)
        return g + self.A.adjoint(d)

    def is_eps_subgradient(self, x, u, eps, tol=1e-10):
        if not isinstance(self.A, MatrixOperator):
            return None
        # u - grad f(x) must equal A^T s with 0.5 ||P s||^2 <= eps
        d = np.asarray(u, dtype=np.float64) - self.subgradient(x)
        M = self.A.matrix
        s, *_ = np.linalg.lstsq(M.T, d, rcond=None)
        if norm(M.T @ s - d) > 1e-8 * max(1.0, norm(d)):
            return False
        return bool(0.5 * float(np.dot(s, s)) <= eps + tol)


class TotalVariation(FunctionOracle):
    """Isotropic total variation ``tau * sum_ij ||(grad x)_ij||_2`` on an image."""

    def __init__(self, tau: float, shape):
        if tau < 0:
            raise ValueError("tau must be nonnegative")
        self.tau = float(tau)
        self.shape = (int(shape[0]), int(shape[1]))
        # ||grad^*|| <= sqrt(8) and dual blocks have norm <= tau
        self.subgradient_bound = self.tau * np.sqrt(8.0 * self.shape[0] * self.shape[1])

    def value(self, x):
        p = discrete_gradient(x, self.shape)
        return self.tau * float(np.sum(np.sqrt(p[0] ** 2 + p[1] ** 2)))

    def subgradient(self, x):
        p = discrete_gradient(x, self.shape)
        mag = np.sqrt(p[0] ** 2 + p[1] ** 2)
        safe = np.where(mag > 0, mag, 1.0)
        q = np.where(mag > 0, self.tau * p / safe, 0.0)
        return gradient_adjoint(q, self.shape)


@dataclass
class SubgradNormTracker:
    """Running maxima of ``||u^k||``, ``||w^k||`` and ``||wbar^k||`` over a run."""

    running_max_u: float = 0.0
    running_max_w: float = 0.0
    running_max_wbar: float = 0.0

    def update(self, u=None, w=None, wbar=None) -> None:
        if u is not None:
            self.running_max_u = max(self.running_max_u, norm(u))
        if w is not None:
            self.running_max_w = max(self.running_max_w, norm(w))
        if wbar is not None:
            self.running_max_wbar = max(self.running_max_wbar, norm(wbar))

    @property
    def c(self) -> float:
        return max(self.running_max_u, self.running_max_w, self.running_max_wbar)


def eps_subdiff_interval_abs(t: float, eps: float) -> tuple[float, float]:
    """Exact eps-subdifferential of ``|.|`` at ``t`` as a closed interval."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    t = float(t)
    # eps >= 2|t| already opens the whole interval; testing first avoids overflow for tiny t
    if t > 0:
        return (-1.0 if eps >= 2.0 * t else 1.0 - eps / t), 1.0
    if t < 0:
        return -1.0, (1.0 if eps >= -2.0 * t else -1.0 + eps / (-t))
    return -1.0, 1.0


def check_eps_subgradient(F: FunctionOracle, x, u, eps: float, probes, tol: float = 1e-12) -> bool:
    """Test ``F(x') >= F(x) + <u, x'-x> - eps`` at every probe point ``x'``.

    A necessary condition in general; exact for separable piecewise-linear
    ``F`` when the probes include the kinks.
    """
    probes = list(probes)
    if not probes:
        raise ValueError("probes must be non-empty")
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    fx = F.value(x)
    for p in probes:
        p = np.asarray(p, dtype=np.float64).reshape(x.shape)
        lhs = F.value(p)
        rhs = fx + float(np.dot(u.ravel(), (p - x).ravel())) - eps
        if lhs < rhs - tol * max(1.0, abs(lhs), abs(rhs)):
            return False
    return True


def induced_eps_from_subgradient(F: FunctionOracle, x_src, v, z, tol: float = 1e-12) -> float:
    """Smallest ``eps`` with ``v`` in the eps-subdifferential at ``z``, given ``v`` in dF(x_src)."""
    x_src = np.asarray(x_src, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    eps = F.value(z) - F.value(x_src) - float(np.dot(np.ravel(v), (z - x_src).ravel()))
    if eps < -tol * max(1.0, abs(F.value(z))):
        raise InvalidCertificateError(f"induced eps = {eps:.3e} < 0: v is not a subgradient at x_src")
    return max(eps, 0.0)


def prox_l1(alpha: float, z) -> np.ndarray:
    """Soft threshold: ``sign(z) * max(|z| - alpha, 0)``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - alpha, 0.0)
