"""Test problems: random lasso, a scalar toy problem and TV deblurring.

Every generator is a pure function of its arguments and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Box, FeasibleSet, WholeSpace, norm
from .oracles import L1Norm, LeastSquares, TotalVariation
from .operators import MatrixOperator, gaussian_blur, power_norm_sq
from .prox import AbsoluteGap, solve_prox_segment, solve_prox_tv_dual


@dataclass
class Reference:
    x_star: np.ndarray
    s_star: float
    d0: float
    flagged: bool = False
    certified_gap: float | None = None


@dataclass
class ProblemInstance:
    """``min_{x in C} f(x) + g(x)`` with solver hooks and metadata."""

    f: object
    g: object
    C: FeasibleSet
    x0: np.ndarray
    L: float | None = None
    kind: str = "generic"
    seed: int | None = None
    shape: tuple | None = None
    reference: Reference | None = None
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.x0.size

    def F(self, x) -> float:
        return self.f.value(x) + self.g.value(x)

    def inexact_prox(self, alpha, y, criterion, max_inner=3000):
        if isinstance(self.g, TotalVariation):
            return solve_prox_tv_dual(alpha, y, self.g.tau, criterion, max_inner, self.shape)
        return solve_prox_segment(self.g, alpha, y, criterion)

    def exact_prox(self, alpha, y, max_inner=20000, gap_tol=1e-14):
        """Exact prox where closed-form; a tightly certified dual solve for TV."""
        if isinstance(self.g, TotalVariation):
            return solve_prox_tv_dual(alpha, y, self.g.tau, AbsoluteGap(gap_tol), max_inner, self.shape).x_bar
        return self.g.prox(alpha, np.asarray(y, dtype=np.float64))

    def with_reference(self, ref: Reference) -> "ProblemInstance":
        self.reference = ref
        return self


# ------------------------------------------------------------------ checks

def lipschitz_spot_check(f, L, rng=None, pairs: int = 100, dim: int | None = None, scale: float = 1.0) -> float:
    """Largest ``||grad f(x) - grad f(y)|| / (L ||x - y||)`` over random pairs."""
    rng = np.random.default_rng(rng)
    n = dim if dim is not None else f.A.in_size
    worst = 0.0
    for _ in range(pairs):
        x = scale * rng.standard_normal(n)
        y = scale * rng.standard_normal(n)
        d = norm(x - y)
        if d == 0:
            continue
        worst = max(worst, norm(f.gradient(x) - f.gradient(y)) / (L * d))
    return worst


def min_quadratic_form(A, rng=None, samples: int = 100) -> float:
    """Smallest ``<x, A x>`` over random unit vectors."""
    rng = np.random.default_rng(rng)
    A = np.asarray(A)
    out = math.inf
    for _ in range(samples):
        x = rng.standard_normal(A.shape[0])
        x /= norm(x)
        out = min(out, float(x @ A @ x))
    return out


# ------------------------------------------------------------------ lasso

def lasso_matrix(n: int, seed: int) -> np.ndarray:
    M = np.random.default_rng(seed).standard_normal((n, n))
    return M.T @ M


def make_lasso(n: int, seed: int = 0, box: tuple | None = None, reference: bool = False, x0=None) -> ProblemInstance:
    """``0.5 ||A x - b||^2 + ||x||_1`` with ``A = M^T M``, ``M`` standard normal, ``b = 1``.

    ``box=(lo, hi)`` restricts the iterates to ``[lo, hi]^n``. The start point
    is all ones unless ``x0`` is given.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    A = lasso_matrix(n, seed)
    b = np.ones(n)
    f = LeastSquares(MatrixOperator(A), b)
    g = L1Norm(1.0, dim=n)
    C = WholeSpace() if box is None else Box(np.full(n, box[0], dtype=float), np.full(n, box[1], dtype=float))
    x_start = np.ones(n) if x0 is None else np.asarray(x0, dtype=np.float64).ravel()
    if not C.contains(x_start):
        x_start = C.project(x_start)
    prob = ProblemInstance(f, g, C, x_start, L=f.lipschitz, kind="lasso", seed=seed, meta={"A": A, "b": b, "n": n})
    if reference:
        prob.reference = reference_solve(prob)
    return prob


def make_toy1d(box: tuple | None = None) -> ProblemInstance:
    """``0.5 (x - 2)^2 + |x|``: minimizer 1, optimal value 1.5."""
    f = LeastSquares(np.array([[1.0]]), np.array([2.0]))
    g = L1Norm(1.0, dim=1)
    C = WholeSpace() if box is None else Box(np.array([box[0]]), np.array([box[1]]))
    prob = ProblemInstance(f, g, C, np.array([-2.0]), L=1.0, kind="toy1d", seed=0, meta={"A": np.eye(1), "b": np.array([2.0])})
    prob.reference = Reference(np.array([1.0]), 1.5, 3.0, certified_gap=0.0)
    return prob


# ---------------------------------------------------------------- TV blur

def synthetic_image(N: int, seed: int = 0) -> np.ndarray:
    """Piecewise-constant test image in [0, 1]: background, a square, a disc, a bar."""
    if N < 4:
        raise ValueError("N must be >= 4")
    rng = np.random.default_rng(seed)
    img = np.full((N, N), 0.2)
    a, b = N // 6, N // 2
    img[a:b, a:b] = 0.8
    ii, jj = np.mgrid[0:N, 0:N]
    cy, cx, r = 0.65 * N, 0.62 * N, 0.2 * N
    img[(ii - cy) ** 2 + (jj - cx) ** 2 <= r * r] = 0.5
    col = int(rng.integers(N // 8, N // 3)) if N >= 8 else 1
    img[int(0.75 * N):int(0.9 * N) + 1, col:col + max(N // 3, 1)] = 1.0
    return img


def make_tv_deblur(N: int = 32, tau: float = 1e-4, noise_std: float = 1e-4, seed: int = 0, image=None,
                   kernel_size: int = 4, blur_std: float = 2.0, blur=True) -> ProblemInstance:
    """``0.5 ||A x - b||^2 + tau TV(x)`` with a Gaussian blur ``A``; start point ``b``.

    ``image`` (an ``N x N`` array) replaces the synthetic ground truth.
    ``blur=False`` uses the identity instead of the blur.
    """
    if image is not None:
        x_true = np.asarray(image, dtype=np.float64)
        if x_true.ndim != 2:
            raise ValueError("image must be 2-D")
        N = x_true.shape[0]
    else:
        x_true = synthetic_image(N, seed)
    shape = tuple(x_true.shape)
    if min(shape) < 4:
        raise ValueError("image must be at least 4 x 4")
    if blur:
        A = gaussian_blur(shape, kernel_size, blur_std)
        L = power_norm_sq(A, iters=2000)
    else:
        from .operators import identity_operator

        A = identity_operator(shape[0] * shape[1])
        L = 1.0
    rng = np.random.default_rng(seed + 1)
    b = A.apply(x_true.ravel()) + noise_std * rng.standard_normal(x_true.size)
    f = LeastSquares(A, b, lipschitz=L)
    g = TotalVariation(tau, shape)
    return ProblemInstance(f, g, WholeSpace(), b.copy(), L=L, kind="tv", seed=seed, shape=shape,
                           meta={"x_true": x_true.ravel(), "tau": tau, "noise_std": noise_std})


# --------------------------------------------------------------- reference

def _lasso_dual_bound(prob: ProblemInstance, x) -> float:
    """Lower bound on the optimal value from a dual-feasible scaling of the residual."""
    A, b = prob.meta["A"], prob.meta["b"]
    if not isinstance(prob.C, WholeSpace) or not isinstance(prob.g, L1Norm):
        return -math.inf
    r = A @ x - b
    s = prob.g.scale
    m = float(np.max(np.abs(A.T @ r))) / s
    theta = r / max(1.0, m)
    return -0.5 * float(theta @ theta) - float(theta @ b)


def _solve_on_support(A, b, s, S, sign):
    # minimize 0.5||A_S z - b||^2 + s <sign, z> through a QR factor of A_S,
    # which avoids squaring the condition number
    Q, R = np.linalg.qr(A[:, S])
    rhs = Q.T @ b - np.linalg.solve(R.T, s * sign)
    return np.linalg.solve(R, rhs)


def _polish_lasso(prob: ProblemInstance, x, F_x, max_rounds: int = 100):
    """Active-set refinement of an approximate lasso minimizer.

    Starting from the support and signs of ``x``, solve the optimality
    system on the support, drop coordinates whose sign flips and add the
    worst violator of ``|grad_i| <= scale`` off the support, until the
    optimality conditions hold. Only unconstrained problems are polished.
    """
    if not isinstance(prob.C, WholeSpace):
        return x, F_x
    A, b = prob.meta["A"], prob.meta["b"]
    s = prob.g.scale
    best, best_F = x, F_x
    mag = np.abs(x)
    S = mag > 1e-9 * max(1.0, mag.max())
    sign = np.sign(x)
    for _ in range(max_rounds):
        if not S.any():
            cand = np.zeros_like(x)
        else:
            try:
                z = _solve_on_support(A, b, s, S, sign[S])
            except np.linalg.LinAlgError:
                break
            bad = np.sign(z) != sign[S]
            if bad.any():
                idx = np.flatnonzero(S)[bad]
                S[idx] = False
                continue
            cand = np.zeros_like(x)
            cand[S] = z
        Fc = prob.F(cand)
        # the exact solve wins ties up to roundoff: its optimality residual is smaller
        if Fc <= best_F + 1e-13 * max(1.0, abs(best_F)):
            best, best_F = cand, Fc
        grad = prob.f.gradient(cand)
        viol = np.where(S, 0.0, np.abs(grad) - s)
        i = int(np.argmax(viol))
        if viol[i] <= 1e-12 * s:
            break
        S[i] = True
        sign[i] = -np.sign(grad[i])
    return best, best_F


def _fista_restart(prob: ProblemInstance, prox, iterations: int, tol: float):
    f = prob.f
    alpha = 1.0 / float(prob.L)
    x = prob.x0.copy()
    y = x.copy()
    t = 1.0
    Fx = prob.F(x)
    best, best_F = x.copy(), Fx
    history = []
    for it in range(iterations):
        x_new = prox(alpha, y - alpha * f.gradient(y))
        F_new = prob.F(x_new)
        if F_new > Fx:
            # function-value restart
            t = 1.0
            y = x.copy()
            x_new = prox(alpha, y - alpha * f.gradient(y))
            F_new = prob.F(x_new)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        step = norm(x_new - x)
        x, Fx, t = x_new, F_new, t_new
        if Fx < best_F:
            best, best_F = x.copy(), Fx
        history.append(best_F)
        if step <= tol * max(1.0, norm(x)) and it > 10:
            break
        # stalled: no progress beyond roundoff over the last 500 iterations
        if it >= 1000 and history[-500] - best_F <= 1e-15 * max(1.0, abs(best_F)):
            break
    return best, best_F, history


def reference_solve(problem: ProblemInstance, iterations: int = 20000, inner_tol: float = 1e-13, x0=None) -> Reference:
    """High-accuracy minimizer by restarted FISTA, polished on the support for lasso.

    The reference is flagged when the value still dropped by more than
    ``inner_tol`` (relative) over the last tenth of the budget.
    """
    start = problem.x0 if x0 is None else np.asarray(x0, dtype=np.float64).ravel()
    C, g = problem.C, problem.g
    if isinstance(g, TotalVariation):
        if not isinstance(C, WholeSpace):
            raise ValueError("TV reference needs C = whole space")

        dual = [None]

        def prox(alpha, z):
            # consecutive prox arguments are close, so the last dual point is a good start
            cert = solve_prox_tv_dual(alpha, z, g.tau, AbsoluteGap(1e-13), 5000, problem.shape, v0=dual[0])
            dual[0] = cert.dual
            return cert.x_bar
    elif isinstance(C, (WholeSpace, Box)) and isinstance(g, L1Norm):
        def prox(alpha, z):
            return C.project(g.prox(alpha, z))
    else:
        raise ValueError("no exact prox available for this problem")

    x, Fx, hist = _fista_restart(problem, prox, iterations, tol=1e-15)
    flagged = False
    certified = None
    if problem.kind in ("lasso", "toy1d") and "A" in problem.meta:
        x, Fx = _polish_lasso(problem, x, Fx)
        lower = _lasso_dual_bound(problem, x)
        certified = Fx - lower if np.isfinite(lower) else None
        if certified is not None:
            flagged = certified > max(1e-8, inner_tol * max(1.0, abs(Fx)))
    if certified is None and len(hist) > 10:
        tail = hist[-max(len(hist) // 10, 2):]
        flagged = (tail[0] - tail[-1]) > inner_tol * max(1.0, abs(Fx)) and len(hist) >= iterations
    return Reference(x, Fx, norm(start - x), flagged=flagged, certified_gap=certified)


def d0_for(problem: ProblemInstance, x_star) -> float:
    return norm(problem.x0 - x_star)

