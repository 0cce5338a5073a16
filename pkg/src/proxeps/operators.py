"""Linear operators: dense matrices, the discrete image gradient and Gaussian blur.

Images travel through the library as flattened vectors; operators that act on
images carry the ``(rows, cols)`` shape themselves.
"""

from __future__ import annotations

import numpy as np

from .core import DimensionError


class LinearOperator:
    """A linear map together with its adjoint.

    ``norm_bound`` is an upper bound on the operator 2-norm, or ``None``.
    """

    def __init__(self, apply, adjoint, in_size, out_size, norm_bound=None, name="op"):
        self._apply = apply
        self._adjoint = adjoint
        self.in_size = int(in_size)
        self.out_size = int(out_size)
        self.norm_bound = norm_bound
        self.name = name

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size != self.in_size:
            raise DimensionError(f"{self.name}: expected {self.in_size} entries, got {x.size}")
        return self._apply(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.size != self.out_size:
            raise DimensionError(f"{self.name}: expected {self.out_size} entries, got {y.size}")
        return self._adjoint(y)

    def __matmul__(self, x):
        return self.apply(x)


class MatrixOperator(LinearOperator):
    def __init__(self, matrix, name="matrix"):
        M = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        self.matrix = M
        super().__init__(
            lambda x: M @ x,
            lambda y: M.T @ y,
            M.shape[1],
            M.shape[0],
            norm_bound=float(np.linalg.norm(M, 2)),
            name=name,
        )


def adjoint_mismatch(op: LinearOperator, rng=None, trials: int = 5) -> float:
    """Largest relative violation of <Ax, y> = <x, A*y> over random pairs."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(op.in_size)
        y = rng.standard_normal(op.out_size)
        ax = op.apply(x)
        aty = op.adjoint(y)
        lhs = float(np.dot(ax, y))
        rhs = float(np.dot(x, aty))
        scale = np.linalg.norm(ax) * np.linalg.norm(y) + np.linalg.norm(x) * np.linalg.norm(aty) + 1e-300
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def power_norm_sq(op: LinearOperator, iters: int = 500, tol: float = 1e-12, seed: int = 0) -> float:
    """Estimate ||A*A|| (= ||A||^2) by power iteration on A*A."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.in_size)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = op.adjoint(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.dot(v, w))
        v = w / nw
        if abs(new - lam) <= tol * max(abs(new), 1.0):
            lam = new
            break
        lam = new
    return float(lam)


# ---------------------------------------------------------------- image ops

def _as_image(x, shape):
    x = np.asarray(x, dtype=np.float64)
    if x.size != shape[0] * shape[1]:
        raise DimensionError(f"image of {x.size} entries does not match shape {shape}")
    return x.reshape(shape)


def discrete_gradient(x, shape) -> np.ndarray:
    """Forward differences with Neumann boundary.

    Returns an array of shape ``(2, rows, cols)``: component 0 holds vertical
    differences ``x[i+1, j] - x[i, j]``, component 1 horizontal differences
    ``x[i, j+1] - x[i, j]``. The last row (resp. column) difference is zero.
    """
    img = _as_image(x, shape)
    p = np.zeros((2,) + img.shape)
    p[0, :-1, :] = img[1:, :] - img[:-1, :]
    p[1, :, :-1] = img[:, 1:] - img[:, :-1]
    return p


def divergence(p, shape) -> np.ndarray:
    """Negative adjoint of :func:`discrete_gradient`, returned as a flat vector."""
    p = np.asarray(p, dtype=np.float64).reshape((2,) + tuple(shape))
    rows, cols = shape
    d = np.zeros(shape)
    py, px = p[0], p[1]
    if rows > 1:
        d[0, :] += py[0, :]
        d[1:-1, :] += py[1:-1, :] - py[:-2, :]
        d[-1, :] -= py[-2, :]
    if cols > 1:
        d[:, 0] += px[:, 0]
        d[:, 1:-1] += px[:, 1:-1] - px[:, :-2]
        d[:, -1] -= px[:, -2]
    return d.ravel()


def gradient_adjoint(p, shape) -> np.ndarray:
    return -divergence(p, shape)


def gradient_operator(shape) -> LinearOperator:
    n = shape[0] * shape[1]
    return LinearOperator(
        lambda x: discrete_gradient(x, shape).ravel(),
        lambda p: gradient_adjoint(p, shape),
        n,
        2 * n,
        norm_bound=np.sqrt(8.0),
        name="grad",
    )


def gaussian_kernel(size: int, std: float) -> np.ndarray:
    """Normalized ``size x size`` Gaussian stencil sampled symmetrically."""
    if size < 1:
        raise ValueError("kernel_size must be >= 1")
    if not std > 0:
        raise ValueError("std must be positive")
    t = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(t**2) / (2.0 * std**2))
    k = np.outer(g, g)
    return k / k.sum()


def _fold_symmetric(zp, before, after, n, axis):
    """Adjoint of ``np.pad(..., mode='symmetric')`` along one axis."""
    zp = np.moveaxis(zp, axis, 0)
    core = zp[before:before + n].copy()
    for m in range(before):
        core[before - 1 - m] += zp[m]
    for m in range(after):
        core[n - 1 - m] += zp[before + n + m]
    return np.moveaxis(core, 0, axis)


def gaussian_blur(shape, kernel_size: int = 4, std: float = 2.0) -> LinearOperator:
    """Truncated Gaussian blur with reflective (half-sample symmetric) boundary.

    The stencil is anchored at index ``kernel_size // 2`` along each axis, so an
    even-sized kernel reaches one pixel further backwards than forwards.
    """
    shape = (int(shape[0]), int(shape[1]))
    k = gaussian_kernel(kernel_size, std)
    anchor = kernel_size // 2
    before, after = anchor, kernel_size - 1 - anchor
    rows, cols = shape
    if before > rows or after > rows or before > cols or after > cols:
        raise ValueError("image too small for the blur stencil")

    def apply(x):
        img = x.reshape(shape)
        xp = np.pad(img, ((before, after), (before, after)), mode="symmetric")
        out = np.zeros(shape)
        for i in range(kernel_size):
            for j in range(kernel_size):
                out += k[i, j] * xp[i:i + rows, j:j + cols]
        return out.ravel()

    def adjoint(y):
        img = y.reshape(shape)
        zp = np.zeros((rows + kernel_size - 1, cols + kernel_size - 1))
        for i in range(kernel_size):
            for j in range(kernel_size):
                zp[i:i + rows, j:j + cols] += k[i, j] * img
        zp = _fold_symmetric(zp, before, after, rows, 0)
        zp = _fold_symmetric(zp, before, after, cols, 1)
        return zp.ravel()

    n = rows * cols
    op = LinearOperator(apply, adjoint, n, n, name="blur")
    op.kernel = k
    op.shape = shape
    # reflection folds border weights back in, so ||A|| can exceed 1 slightly
    op.norm_bound = float(np.sqrt(power_norm_sq(op, iters=2000))) * (1.0 + 1e-9)
    return op


def identity_operator(size: int) -> LinearOperator:
    return LinearOperator(lambda x: x.copy(), lambda y: y.copy(), size, size, norm_bound=1.0, name="identity")
