"""Inexact proximal epsilon-subgradient methods, the accelerated variant and baselines.

Every solver returns a :class:`RunResult` holding one :class:`IterateRecord`
per outer iteration. When a reference point is configured, each record also
carries the slack of the per-iteration descent inequality (right side minus
left side), which must stay nonnegative.

Problems are duck-typed: they need ``f``, ``g``, ``C``, ``x0``, ``L`` and an
``inexact_prox(alpha, y, criterion, max_inner)`` method returning a
:class:`~proxeps.prox.ProxCertificate`.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import norm, sqnorm
from .oracles import SubgradNormTracker
from .prox import AbsoluteGap, AccelCriterion, RAbsolute, SigmaApprox
from .stepsize import (
    ZERO,
    Constant,
    PowerSchedule,
    StationarityError,
    sigma_term,
)


class InvariantViolation(AssertionError):
    """A per-iteration inequality that must hold failed beyond tolerance."""


class SummabilityWarning(UserWarning):
    pass


# ------------------------------------------------------------------ records

@dataclass
class IterateRecord:
    k: int
    x: np.ndarray | None
    y: np.ndarray | None
    u: np.ndarray | None
    w_bar: np.ndarray | None
    eps_k: float
    eps_bar_k: float
    alpha_k: float
    r_k: float
    func_val: float
    best_val: float
    lemma_slack: float | None
    inner_iterations: int
    elapsed: float
    kind: str = "alg1"
    sigma: float = 0.0
    x_next: np.ndarray | None = None
    x_bar: np.ndarray | None = None
    w: np.ndarray | None = None
    flagged: bool = False
    residual_lhs: float = 0.0
    residual_rhs: float = 0.0
    u_plus_w_sq: float = 0.0
    w_bar_sq: float = 0.0
    sq_step: float = 0.0
    rel_diff: float = 0.0
    dist_ref: float | None = None
    dist_next: float | None = None


@dataclass
class SquaredStep:
    """Stop once ``||x^{k+1} - x^k||^2 <= tol``."""

    tol: float = 1e-4

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def done(self, rec: IterateRecord, F_next=None) -> bool:
        return rec.sq_step <= self.tol


@dataclass
class RelativeDiff:
    """Stop once ``||x^{k+1} - x^k|| / ||x^{k+1}|| < tol``."""

    tol: float = 1e-4

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def done(self, rec: IterateRecord, F_next=None) -> bool:
        return rec.rel_diff < self.tol


@dataclass
class TargetGap:
    """Stop once the newest iterate satisfies ``F - s_star <= tol``."""

    s_star: float
    tol: float = 1e-4

    def done(self, rec: IterateRecord, F_next=None) -> bool:
        return F_next is not None and F_next - self.s_star <= self.tol


@dataclass
class SolverConfig:
    """Settings shared by all solvers; fields a solver does not use are ignored.

    ``r_schedule``, ``eps_schedule`` and ``e_schedule`` map a 1-based
    iteration index to a nonnegative number.
    """

    stepsize: object = None
    max_outer: int = 200
    max_inner: int = 3000
    stop: object = None
    eps_schedule: object = ZERO
    r_schedule: object = ZERO
    sigma: float = 0.0
    sigma2: float | None = None
    e_schedule: object = ZERO
    eps_mode: str = "exact"
    seed: int = 0
    x_ref: np.ndarray | None = None
    s_star: float | None = None
    c: float | None = None
    ipgm_beta: str = "zero"
    store_vectors: bool = True
    divergence_norm: float = 1e12
    check_invariants: bool = False

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.max_inner < 1:
            raise ValueError("max_inner must be >= 1")
        if self.eps_mode not in ("exact", "sampled"):
            raise ValueError("eps_mode must be 'exact' or 'sampled'")
        if self.ipgm_beta not in ("zero", "nesterov"):
            raise ValueError("ipgm_beta must be 'zero' or 'nesterov'")
        if not 0 <= self.sigma < 1:
            raise ValueError("sigma must lie in [0, 1)")
        if self.sigma2 is not None and not 0 <= self.sigma2 < 0.5:
            raise ValueError("sigma2 must lie in [0, 1/2)")


@dataclass
class AccelState:
    """State of the accelerated method after iteration ``k``.

    ``slope_sum`` and ``intercept_sum`` define ``t_k * model_k(x) =
    intercept_sum + <slope_sum, x>``; ``eta`` is the minimum of that plus
    ``||x - x0||^2 / 2``.
    """

    k: int
    t: float
    beta: float
    x: np.ndarray
    x_bar: np.ndarray
    x_tilde: np.ndarray
    eta: float
    F_bar: float
    lin_err: float
    slope_sum: np.ndarray
    intercept_sum: float
    sigma2: float
    L: float
    argmin_gap: float = 0.0

    def model(self, x) -> float:
        """Affine minorant ``model_k(x)`` of ``f + g``."""
        if self.t == 0:
            return 0.0
        return (self.intercept_sum + float(np.dot(self.slope_sum, np.ravel(x)))) / self.t


@dataclass
class RunResult:
    records: list
    x: np.ndarray
    stop_reason: str
    algorithm: str
    tracker: SubgradNormTracker = field(default_factory=SubgradNormTracker)
    accel_trace: list | None = None
    elapsed: float = 0.0
    estimate_violations: int = 0

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def inner_total(self) -> int:
        return sum(r.inner_iterations for r in self.records)

    @property
    def flagged_count(self) -> int:
        return sum(1 for r in self.records if r.flagged)

    @property
    def converged(self) -> bool:
        return self.stop_reason in ("stop-rule", "optimal", "stationary")


# ---------------------------------------------------------------- helpers

def best_value(records) -> list:
    """Running minimum of ``func_val`` (ties keep the earlier index)."""
    out, best = [], math.inf
    for r in records:
        v = r.func_val if isinstance(r, IterateRecord) else float(r)
        if v < best:
            best = v
        out.append(best)
    return out


def _subgrad_g(g, x, u):
    # a subgradient of g at x; when g can, pick the one making ||u + w|| smallest
    if hasattr(g, "closest_subgradient"):
        return g.closest_subgradient(x, -u)
    return g.subgradient(x)


def _eps_subgrad_f(f, x, eps, mode, rng):
    if mode == "sampled" and eps > 0:
        return f.eps_subgradient(x, eps, rng=rng)
    return f.subgradient(x)


def _lemma_scale(*vals):
    return max([1.0] + [abs(v) for v in vals])


def _descent_sides(kind, x, x_next, x_ref, F_x, F_ref, alpha, eps, r, sigma, upw_sq, wbar_sq):
    lhs = sqnorm(x_next - x_ref)
    d2 = sqnorm(x - x_ref)
    rhs = d2 + 2.0 * alpha * (F_ref - F_x + eps) + alpha * alpha * upw_sq
    if kind == "alg2":
        rhs += sigma_term(sigma, 1.0) * alpha * alpha * wbar_sq
    else:
        rhs += r * r
    return lhs, rhs, _lemma_scale(lhs, d2, 2 * alpha * F_x, 2 * alpha * F_ref)


def verify_descent_lemma(record: IterateRecord, x_ref, F_ref: float, tol: float = 1e-9, raise_on_violation=True) -> float:
    """Slack (right minus left side) of the descent inequality at ``record``.

    Needs the record's vectors ``x``, ``x_next`` (stored by default). Raises
    :class:`InvariantViolation` if the slack is below ``-tol * scale``.
    """
    if record.x is None or record.x_next is None:
        raise ValueError("record has no stored vectors")
    x_ref = np.asarray(x_ref, dtype=np.float64)
    lhs, rhs, scale = _descent_sides(
        record.kind, record.x, record.x_next, x_ref, record.func_val, F_ref,
        record.alpha_k, record.eps_k, record.r_k, record.sigma, record.u_plus_w_sq, record.w_bar_sq,
    )
    slack = rhs - lhs
    if raise_on_violation and slack < -tol * scale:
        raise InvariantViolation(f"descent inequality violated at k={record.k}: slack {slack:.3e}")
    return slack


def rate_bound_alg1(records, d0: float, k: int) -> float:
    """Bound on ``best_val_k - s_star`` for the absolute-error method."""
    rs = records[: k + 1]
    s_a = sum(r.alpha_k for r in rs)
    if s_a <= 0:
        return math.inf
    num = d0 * d0
    num += 2.0 * sum(r.alpha_k * r.eps_k for r in rs)
    num += sum(r.r_k * r.r_k for r in rs)
    num += max(r.u_plus_w_sq for r in rs) * sum(r.alpha_k**2 for r in rs)
    return num / (2.0 * s_a)


def rate_bound_alg2(records, d0: float, k: int) -> float:
    """Bound on ``best_val_k - s_star`` for the relative-error method."""
    rs = records[: k + 1]
    s_a = sum(r.alpha_k for r in rs)
    if s_a <= 0:
        return math.inf
    c_tilde = max(sigma_term(r.sigma, 1.0) * r.w_bar_sq + r.u_plus_w_sq for r in rs)
    num = d0 * d0 + 2.0 * sum(r.alpha_k * r.eps_k for r in rs) + c_tilde * sum(r.alpha_k**2 for r in rs)
    return num / (2.0 * s_a)


def rate_bound_series(records, d0: float, relative: bool = False) -> list:
    """``rate_bound_alg1`` (or ``_alg2`` when ``relative``) at every k, in one pass."""
    out = []
    s_a = s_ae = s_r2 = s_a2 = 0.0
    c = 0.0
    for r in records:
        s_a += r.alpha_k
        s_ae += r.alpha_k * r.eps_k
        s_a2 += r.alpha_k**2
        if relative:
            c = max(c, sigma_term(r.sigma, 1.0) * r.w_bar_sq + r.u_plus_w_sq)
        else:
            s_r2 += r.r_k * r.r_k
            c = max(c, r.u_plus_w_sq)
        num = d0 * d0 + 2.0 * s_ae + s_r2 + c * s_a2
        out.append(num / (2.0 * s_a) if s_a > 0 else math.inf)
    return out


def rate_bound_accel(state, d0: float, k: int) -> float:
    """``2 L d0^2 / (sigma^4 (1 - sigma^2) k^2)``; ``state`` supplies ``L`` and ``sigma2``."""
    return accel_bound(state.L, state.sigma2, d0, k)


def accel_bound(L: float, sigma2: float, d0: float, k: int) -> float:
    if not 0 < sigma2 < 0.5:
        raise ValueError("sigma^2 must lie in (0, 1/2)")
    if k < 1:
        raise ValueError("k must be >= 1")
    return 2.0 * L * d0 * d0 / (sigma2 * sigma2 * (1.0 - sigma2) * k * k)


def accel_t_lower(L: float, sigma2: float, k: int) -> float:
    return k * k * sigma2 * sigma2 * (1.0 - sigma2) / (4.0 * L)


def accel_beta(alpha: float, sigma2: float, t_prev: float) -> float:
    a = alpha * (1.0 - sigma2)
    return 0.5 * (a + math.sqrt(a * a + 4.0 * a * t_prev))


def quasi_fejer_slacks(records) -> list:
    """``max(0, ||x^{k+1}-x_ref||^2 - ||x^k-x_ref||^2)`` per record."""
    out = []
    for r in records:
        if r.dist_ref is None:
            raise ValueError("records carry no reference distances")
        out.append(max(0.0, r.dist_next**2 - r.dist_ref**2))
    return out


def _rel_diff(x_new, x_old):
    nx = norm(x_new)
    d = norm(x_new - x_old)
    return d / nx if nx > 0 else (0.0 if d == 0 else math.inf)


def _check_square_summable(schedule, name, horizon):
    vals = [schedule(k) for k in range(1, horizon + 1)]
    if any(v < 0 for v in vals):
        raise ValueError(f"{name} must be nonnegative")
    if hasattr(schedule, "square_summable") and not schedule.square_summable():
        warnings.warn(f"{name} is not square summable", SummabilityWarning, stacklevel=3)


# ----------------------------------------------- subgradient-type methods

def _subgradient_method(problem, config: SolverConfig, kind: str, criterion_for, label: str) -> RunResult:
    f, g, C = problem.f, problem.g, problem.C
    policy = config.stepsize
    if policy is None:
        raise ValueError("config.stepsize is required")
    rng = np.random.default_rng(config.seed)
    tracker = SubgradNormTracker()
    x = np.array(problem.x0, dtype=np.float64).ravel()
    x_ref = None if config.x_ref is None else np.asarray(config.x_ref, dtype=np.float64).ravel()
    F_ref = None if x_ref is None else f.value(x_ref) + g.value(x_ref)
    sigma = config.sigma if kind == "alg2" else 0.0
    c_bound = config.c or getattr(g, "subgradient_bound", None)
    store = config.store_vectors
    records = []
    best = math.inf
    stop_reason = "max-outer"
    t0 = time.perf_counter()

    for k in range(config.max_outer):
        idx = k + 1
        F_x = f.value(x) + g.value(x)
        eps = float(config.eps_schedule(idx))
        r = float(config.r_schedule(idx)) if kind == "alg1" else 0.0
        u = _eps_subgrad_f(f, x, eps, config.eps_mode, rng)
        w = _subgrad_g(g, x, u)
        upw_sq = sqnorm(u + w)
        tracker.update(u=u, w=w)
        c = c_bound if c_bound is not None else max(tracker.c, 1e-300)
        try:
            alpha = policy.step(idx, F_xk=F_x, eps_k=eps, u_plus_w_normsq=upw_sq, sigma=sigma, c=c)
        except StationarityError:
            stop_reason = "stationary"
            break
        best = min(best, F_x)
        if alpha == 0.0:
            # known optimal value reached: the step is zero and x is kept
            rec = IterateRecord(
                k, x if store else None, x if store else None, u if store else None, None,
                eps, 0.0, 0.0, r, F_x, best, 0.0 if x_ref is not None else None, 0,
                time.perf_counter() - t0, kind=kind, sigma=sigma, x_next=x if store else None,
                u_plus_w_sq=upw_sq,
            )
            if x_ref is not None:
                rec.dist_ref = rec.dist_next = norm(x - x_ref)
            records.append(rec)
            stop_reason = "optimal"
            break

        y = x - alpha * u
        cert = problem.inexact_prox(alpha, y, criterion_for(r, sigma), config.max_inner)
        x_next = C.project(y - alpha * cert.w_bar)
        tracker.update(wbar=cert.w_bar)

        rec = IterateRecord(
            k=k,
            x=x if store else None,
            y=y if store else None,
            u=u if store else None,
            w_bar=cert.w_bar if store else None,
            eps_k=eps,
            eps_bar_k=float(cert.eps_bar),
            alpha_k=float(alpha),
            r_k=r,
            func_val=F_x,
            best_val=best,
            lemma_slack=None,
            inner_iterations=int(cert.inner_iterations),
            elapsed=time.perf_counter() - t0,
            kind=kind,
            sigma=sigma,
            x_next=x_next if store else None,
            x_bar=cert.x_bar if store else None,
            w=w if store else None,
            flagged=bool(cert.flagged),
            residual_lhs=float(cert.lhs),
            residual_rhs=float(cert.rhs),
            u_plus_w_sq=upw_sq,
            w_bar_sq=sqnorm(cert.w_bar),
            sq_step=sqnorm(x_next - x),
            rel_diff=_rel_diff(x_next, x),
        )
        if x_ref is not None:
            lhs, rhs, scale = _descent_sides(kind, x, x_next, x_ref, F_x, F_ref, alpha, eps, r, sigma, upw_sq, rec.w_bar_sq)
            rec.lemma_slack = rhs - lhs
            rec.dist_ref = norm(x - x_ref)
            rec.dist_next = norm(x_next - x_ref)
            if config.check_invariants and rec.lemma_slack < -1e-9 * scale:
                raise InvariantViolation(f"descent inequality violated at k={k}: slack {rec.lemma_slack:.3e}")
        records.append(rec)
        x = x_next
        if not np.all(np.isfinite(x)) or norm(x) > config.divergence_norm:
            stop_reason = "diverged"
            break
        if config.stop is not None and config.stop.done(rec, None):
            stop_reason = "stop-rule"
            break

    est = getattr(policy, "estimates", None)
    return RunResult(
        records, x, stop_reason, label, tracker, elapsed=time.perf_counter() - t0,
        estimate_violations=getattr(est, "violations", 0) if est is not None else 0,
    )


def pesm1_run(problem, config: SolverConfig) -> RunResult:
    """Absolute-error method: ``w_bar`` in dg(x_bar), ``||a w_bar + x_bar - y|| <= r_k``."""
    _check_square_summable(config.r_schedule, "r_k", min(config.max_outer, 10))
    return _subgradient_method(problem, config, "alg1", lambda r, s: RAbsolute(r), "pesm1")


def pesm2_run(problem, config: SolverConfig) -> RunResult:
    """Relative-error method: ``||a w_bar + x_bar - y||^2 + 2 a eps_bar <= sigma^2 ||x_bar - y||^2``."""
    return _subgradient_method(problem, config, "alg2", lambda r, s: SigmaApprox(s), "pesm2")


def pss_run(problem, config: SolverConfig) -> RunResult:
    """Exact proximal subgradient baseline: ``x+ = P_C(prox(x - a u))``, ``u`` in df(x)."""
    f, g, C = problem.f, problem.g, problem.C
    policy = config.stepsize
    x = np.array(problem.x0, dtype=np.float64).ravel()
    x_ref = None if config.x_ref is None else np.asarray(config.x_ref, dtype=np.float64).ravel()
    F_ref = None if x_ref is None else f.value(x_ref) + g.value(x_ref)
    store = config.store_vectors
    tracker = SubgradNormTracker()
    records, best, stop_reason = [], math.inf, "max-outer"
    rng = np.random.default_rng(config.seed)
    t0 = time.perf_counter()
    for k in range(config.max_outer):
        idx = k + 1
        F_x = f.value(x) + g.value(x)
        eps = float(config.eps_schedule(idx))
        u = _eps_subgrad_f(f, x, eps, config.eps_mode, rng)
        w = _subgrad_g(g, x, u)
        upw_sq = sqnorm(u + w)
        tracker.update(u=u, w=w)
        try:
            alpha = policy.step(idx, F_xk=F_x, eps_k=eps, u_plus_w_normsq=upw_sq, sigma=0.0, c=tracker.c)
        except StationarityError:
            stop_reason = "stationary"
            break
        best = min(best, F_x)
        if alpha == 0.0:
            stop_reason = "optimal"
            break
        y = x - alpha * u
        p = problem.exact_prox(alpha, y)
        x_next = C.project(p)
        w_bar = (y - p) / alpha
        tracker.update(wbar=w_bar)
        rec = IterateRecord(
            k, x if store else None, y if store else None, u if store else None, w_bar if store else None,
            eps, 0.0, float(alpha), 0.0, F_x, best, None, 1, time.perf_counter() - t0, kind="alg1",
            x_next=x_next if store else None, x_bar=p if store else None, w=w if store else None,
            u_plus_w_sq=upw_sq, w_bar_sq=sqnorm(w_bar), sq_step=sqnorm(x_next - x), rel_diff=_rel_diff(x_next, x),
        )
        if x_ref is not None:
            lhs, rhs, _ = _descent_sides("alg1", x, x_next, x_ref, F_x, F_ref, alpha, eps, 0.0, 0.0, upw_sq, 0.0)
            rec.lemma_slack = rhs - lhs
            rec.dist_ref = norm(x - x_ref)
            rec.dist_next = norm(x_next - x_ref)
        records.append(rec)
        x = x_next
        if not np.all(np.isfinite(x)) or norm(x) > config.divergence_norm:
            stop_reason = "diverged"
            break
        if config.stop is not None and config.stop.done(rec, None):
            stop_reason = "stop-rule"
            break
    return RunResult(records, x, stop_reason, "pss", tracker, elapsed=time.perf_counter() - t0)


# ------------------------------------------------------------ accelerated

def accel_run(problem, config: SolverConfig) -> RunResult:
    """Accelerated inexact proximal gradient method with relative error.

    Uses ``alpha = sigma^2 / L`` with ``sigma^2 = config.sigma2`` (or
    ``config.sigma**2``), which must lie in ``(0, 1/2)``. Records index the
    new point ``x_bar^k`` (k >= 1); ``func_val`` is ``F(x_bar^k)``.
    """
    f, g = problem.f, problem.g
    if not f.is_smooth:
        raise ValueError("accelerated method needs a smooth f")
    L = float(problem.L if problem.L is not None else f.lipschitz)
    sigma2 = config.sigma2 if config.sigma2 is not None else config.sigma**2
    if not 0 < sigma2 < 0.5:
        raise ValueError("sigma^2 must lie in (0, 1/2); sigma^2 = 0 gives a zero step")
    sigma = math.sqrt(sigma2)
    alpha = sigma2 / L
    x0 = np.array(problem.x0, dtype=np.float64).ravel()
    x_prev = x0.copy()
    xbar_prev = x0.copy()
    t_prev = 0.0
    slope_sum = np.zeros_like(x0)
    intercept = 0.0
    prev_gap = -math.inf
    store = config.store_vectors
    x_ref = None if config.x_ref is None else np.asarray(config.x_ref, dtype=np.float64).ravel()
    records, trace, best = [], [], math.inf
    tracker = SubgradNormTracker()
    stop_reason = "max-outer"
    t0 = time.perf_counter()

    for k in range(1, config.max_outer + 1):
        beta = accel_beta(alpha, sigma2, t_prev)
        t = t_prev + beta
        x_tilde = (t_prev / t) * xbar_prev + (beta / t) * x_prev
        grad = f.gradient(x_tilde)
        y = x_tilde - alpha * grad
        cert = problem.inexact_prox(alpha, y, AccelCriterion(sigma, x_tilde, grad), config.max_inner)
        x_bar, w_bar = cert.x_bar, cert.w_bar
        x = x_prev - beta * (grad + w_bar)

        f_bar = f.value(x_bar)
        F_bar = f_bar + g.value(x_bar)
        lin_err = max(f_bar - f.value(x_tilde) - float(np.dot(grad, x_bar - x_tilde)), 0.0)
        slope = w_bar + grad
        slope_sum = slope_sum + beta * slope
        intercept += beta * (F_bar - cert.eps_bar - lin_err - float(np.dot(slope, x_bar)))
        eta = intercept + float(np.dot(slope_sum, x0)) - 0.5 * sqnorm(slope_sum)
        argmin_gap = norm(x - (x0 - slope_sum))
        state = AccelState(k, t, beta, x.copy(), x_bar.copy(), x_tilde.copy(), eta, F_bar, lin_err,
                           slope_sum.copy(), intercept, sigma2, L, argmin_gap)
        gap_now = eta - t * F_bar

        if config.check_invariants:
            scale = _lemma_scale(eta, t * F_bar)
            if t < accel_t_lower(L, sigma2, k):
                raise InvariantViolation(f"t_k below its lower bound at k={k}")
            if gap_now < prev_gap - 1e-9 * scale:
                raise InvariantViolation(f"eta_k - t_k F(x_bar^k) decreased at k={k}")
            if argmin_gap > 1e-9 * max(1.0, norm(x)):
                raise InvariantViolation(f"x^k is not the model argmin at k={k}")
        prev_gap = max(prev_gap, gap_now)

        tracker.update(u=grad, wbar=w_bar)
        best = min(best, F_bar)
        rec = IterateRecord(
            k=k, x=x_tilde if store else None, y=y if store else None, u=grad if store else None,
            w_bar=w_bar if store else None, eps_k=lin_err, eps_bar_k=float(cert.eps_bar), alpha_k=alpha,
            r_k=0.0, func_val=F_bar, best_val=best, lemma_slack=None, inner_iterations=int(cert.inner_iterations),
            elapsed=time.perf_counter() - t0, kind="accel", sigma=sigma,
            x_next=x_bar if store else None, x_bar=x_bar if store else None, flagged=bool(cert.flagged),
            residual_lhs=float(cert.lhs), residual_rhs=float(cert.rhs), w_bar_sq=sqnorm(w_bar),
            sq_step=sqnorm(x_bar - xbar_prev), rel_diff=_rel_diff(x_bar, xbar_prev),
        )
        if x_ref is not None:
            rec.dist_ref = norm(xbar_prev - x_ref)
            rec.dist_next = norm(x_bar - x_ref)
        records.append(rec)
        trace.append(state)
        x_prev, xbar_prev, t_prev = x, x_bar, t
        if not np.all(np.isfinite(x_bar)) or norm(x_bar) > config.divergence_norm:
            stop_reason = "diverged"
            break
        if config.stop is not None and config.stop.done(rec, F_bar):
            stop_reason = "stop-rule"
            break

    return RunResult(records, xbar_prev, stop_reason, "accel", tracker, accel_trace=trace,
                     elapsed=time.perf_counter() - t0)


# ------------------------------------------------------------------- IPGM

def ipgm_error_warning(q: float) -> bool:
    """True (and warns) when ``k * sqrt(e_k) = C k^(1-q)`` is not summable."""
    if q <= 2:
        warnings.warn(f"k*sqrt(e_k) is not summable for q = {q} <= 2", SummabilityWarning, stacklevel=2)
        return True
    return False


def ipgm_run(problem, config: SolverConfig) -> RunResult:
    """Inexact proximal gradient method with absolute prox-objective error ``e_k``.

    ``x^k`` is an ``e_k``-optimal prox of ``y^{k-1} - alpha grad f(y^{k-1})``
    with ``alpha = 1/L`` (or ``config.stepsize`` when it is a constant
    policy); ``y^k = x^k + beta_k (x^k - x^{k-1})`` with ``beta_k = 0`` or
    ``(k-1)/(k+2)``.
    """
    f, g = problem.f, problem.g
    if not f.is_smooth:
        raise ValueError("IPGM needs a smooth f")
    sched = config.e_schedule
    if isinstance(sched, PowerSchedule) and sched.squared and sched.coef > 0:
        ipgm_error_warning(sched.power)
    if isinstance(config.stepsize, Constant):
        alpha = config.stepsize.alpha
    else:
        alpha = 1.0 / float(problem.L if problem.L is not None else f.lipschitz)
    x_prev = np.array(problem.x0, dtype=np.float64).ravel()
    y_prev = x_prev.copy()
    store = config.store_vectors
    x_ref = None if config.x_ref is None else np.asarray(config.x_ref, dtype=np.float64).ravel()
    records, best = [], math.inf
    tracker = SubgradNormTracker()
    stop_reason = "max-outer"
    t0 = time.perf_counter()
    for k in range(1, config.max_outer + 1):
        grad = f.gradient(y_prev)
        z = y_prev - alpha * grad
        e_k = float(config.e_schedule(k))
        cert = problem.inexact_prox(alpha, z, AbsoluteGap(e_k), config.max_inner)
        x = cert.x_bar
        beta = 0.0 if config.ipgm_beta == "zero" else (k - 1.0) / (k + 2.0)
        y = x + beta * (x - x_prev)
        F_x = f.value(x) + g.value(x)
        best = min(best, F_x)
        tracker.update(u=grad, wbar=cert.w_bar)
        rec = IterateRecord(
            k=k, x=y_prev if store else None, y=z if store else None, u=grad if store else None,
            w_bar=cert.w_bar if store else None, eps_k=e_k, eps_bar_k=float(cert.eps_bar), alpha_k=alpha,
            r_k=0.0, func_val=F_x, best_val=best, lemma_slack=None, inner_iterations=int(cert.inner_iterations),
            elapsed=time.perf_counter() - t0, kind="ipgm", x_next=x if store else None,
            x_bar=x if store else None, flagged=bool(cert.flagged), residual_lhs=float(cert.lhs),
            residual_rhs=float(cert.rhs), w_bar_sq=sqnorm(cert.w_bar), sq_step=sqnorm(x - x_prev),
            rel_diff=_rel_diff(x, x_prev),
        )
        if x_ref is not None:
            rec.dist_ref = norm(x_prev - x_ref)
            rec.dist_next = norm(x - x_ref)
        records.append(rec)
        x_prev, y_prev = x, y
        if not np.all(np.isfinite(x)) or norm(x) > config.divergence_norm:
            stop_reason = "diverged"
            break
        if config.stop is not None and config.stop.done(rec, F_x):
            stop_reason = "stop-rule"
            break
    return RunResult(records, x_prev, stop_reason, "ipgm", tracker, elapsed=time.perf_counter() - t0)


SOLVERS = {
    "pesm1": pesm1_run,
    "pesm2": pesm2_run,
    "pss": pss_run,
    "accel": accel_run,
    "ipgm": ipgm_run,
}


def run(algorithm: str, problem, config: SolverConfig) -> RunResult:
    try:
        fn = SOLVERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(SOLVERS)}") from None
    return fn(problem, config)

