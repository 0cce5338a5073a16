"""Exact and certified-inexact proximal operators.

An inexact prox returns a triplet ``(x_bar, w_bar, eps_bar)`` together with
the two sides of the inequality it was accepted under. Four acceptance rules
are supported, plus an absolute bound on the proximal-objective gap:

* ``RAbsolute(r)``: ``w_bar`` in dg(x_bar) and ``||a w_bar + x_bar - y|| <= r``
* ``SigmaApprox(s)``: ``||a w_bar + x_bar - y||^2 + 2 a eps_bar <= s^2 ||x_bar - y||^2``
* ``SigmaQuasi(s)``: same left side, right side ``s^2 (||a w_bar||^2 + ||x_bar - y||^2)``
* ``AccelCriterion(s, x_tilde, grad)``: right side
  ``s^2 (||x_bar - x_tilde||^2 + ||a (w_bar + grad)||^2)``
* ``AbsoluteGap(e)``: proximal objective within ``e`` of its minimum
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import sqnorm
from .oracles import (
    FunctionOracle,
    InvalidCertificateError,
    induced_eps_from_subgradient,
    prox_l1,
)
from .operators import discrete_gradient, gradient_adjoint

__all__ = [
    "AbsoluteGap",
    "AccelCriterion",
    "CheckResult",
    "DualIterate",
    "ProxCertificate",
    "RAbsolute",
    "SigmaApprox",
    "SigmaQuasi",
    "check_accel_criterion",
    "check_r_approximate",
    "check_sigma_approximate",
    "check_sigma_quasi_approximate",
    "e_optimality_excess",
    "prox_l1",
    "r_to_e",
    "solve_prox_absolute",
    "solve_prox_segment",
    "solve_prox_tv_dual",
    "tv_dual_gap",
]

# relative slack for roundoff when comparing the two sides of a criterion
_REL_TOL = 1e-12


class PreconditionError(ValueError):
    pass


class CheckResult(NamedTuple):
    passed: bool
    lhs: float
    rhs: float


def _passes(lhs: float, rhs: float, floor: float = 0.0) -> bool:
    return lhs <= rhs * (1.0 + _REL_TOL) + floor


def _roundoff(*vecs, squared=True) -> float:
    # residuals like a*v + x - z cancel to about machine eps times the operand size
    e = 8.0 * np.finfo(float).eps * max([1.0] + [float(np.max(np.abs(v))) for v in vecs])
    return e * e if squared else e


# ---------------------------------------------------------------- criteria

@dataclass(frozen=True)
class RAbsolute:
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be nonnegative")

    def measure(self, alpha, y, x_bar, w_bar, eps_bar, gap=None):
        return np.sqrt(sqnorm(alpha * w_bar + x_bar - y)), self.r


def _relative_lhs(alpha, y, x_bar, w_bar, eps_bar):
    return sqnorm(alpha * w_bar + x_bar - y) + 2.0 * alpha * eps_bar


@dataclass(frozen=True)
class SigmaApprox:
    sigma: float

    def __post_init__(self):
        if not 0 <= self.sigma < 1:
            raise ValueError("sigma must lie in [0, 1)")

    def measure(self, alpha, y, x_bar, w_bar, eps_bar, gap=None):
        return _relative_lhs(alpha, y, x_bar, w_bar, eps_bar), self.sigma**2 * sqnorm(x_bar - y)


@dataclass(frozen=True)
class SigmaQuasi:
    sigma: float

    def __post_init__(self):
        if not 0 <= self.sigma < 1:
            raise ValueError("sigma must lie in [0, 1)")

    def measure(self, alpha, y, x_bar, w_bar, eps_bar, gap=None):
        rhs = self.sigma**2 * (sqnorm(alpha * w_bar) + sqnorm(x_bar - y))
        return _relative_lhs(alpha, y, x_bar, w_bar, eps_bar), rhs


@dataclass(frozen=True, eq=False)
class AccelCriterion:
    sigma: float
    x_tilde: np.ndarray
    grad: np.ndarray

    def __post_init__(self):
        if not 0 <= self.sigma**2 < 0.5:
            raise ValueError("sigma^2 must lie in [0, 1/2)")

    def measure(self, alpha, y, x_bar, w_bar, eps_bar, gap=None):
        rhs = self.sigma**2 * (sqnorm(x_bar - self.x_tilde) + sqnorm(alpha * (w_bar + self.grad)))
        return _relative_lhs(alpha, y, x_bar, w_bar, eps_bar), rhs


@dataclass(frozen=True)
class AbsoluteGap:
    e: float

    def __post_init__(self):
        if self.e < 0:
            raise ValueError("e must be nonnegative")

    def measure(self, alpha, y, x_bar, w_bar, eps_bar, gap=None):
        if gap is None:
            raise ValueError("AbsoluteGap needs the proximal-objective gap")
        return gap, self.e


@dataclass
class ProxCertificate:
    """Inexact prox triplet with the evidence it was accepted on.

    ``flagged`` marks a triplet returned because the inner budget ran out;
    its ``lhs`` may exceed ``rhs``.
    """

    x_bar: np.ndarray
    w_bar: np.ndarray
    eps_bar: float
    criterion: object
    lhs: float
    rhs: float
    inner_iterations: int
    flagged: bool = False
    gap: float | None = None
    dual: np.ndarray | None = field(default=None, repr=False)
    gap_trace: list | None = field(default=None, repr=False)


# ---------------------------------------------------------------- checkers

def _membership(g, x, v, eps):
    if g is None:
        return
    ok = g.is_eps_subgradient(x, v, eps)
    if ok is False:
        raise InvalidCertificateError("v is not an eps-subgradient of g at x")


def check_r_approximate(alpha, z, x, v, r, g: FunctionOracle | None = None) -> CheckResult:
    """Is ``x`` an r-approximate prox of ``alpha g`` at ``z`` with witness ``v``?"""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    z, x, v = (np.asarray(a, dtype=np.float64) for a in (z, x, v))
    _membership(g, x, v, 0.0)
    lhs, rhs = RAbsolute(r).measure(alpha, z, x, v, 0.0)
    return CheckResult(_passes(lhs, rhs, _roundoff(z, x, alpha * v, squared=False)), lhs, rhs)


def check_sigma_approximate(alpha, z, x, v, eps, sigma, g=None) -> CheckResult:
    z, x, v = (np.asarray(a, dtype=np.float64) for a in (z, x, v))
    _membership(g, x, v, eps)
    lhs, rhs = SigmaApprox(sigma).measure(alpha, z, x, v, eps)
    return CheckResult(_passes(lhs, rhs, _roundoff(z, x, alpha * v)), lhs, rhs)


def check_sigma_quasi_approximate(alpha, z, x, v, eps, sigma, g=None) -> CheckResult:
    z, x, v = (np.asarray(a, dtype=np.float64) for a in (z, x, v))
    _membership(g, x, v, eps)
    lhs, rhs = SigmaQuasi(sigma).measure(alpha, z, x, v, eps)
    return CheckResult(_passes(lhs, rhs, _roundoff(z, x, alpha * v)), lhs, rhs)


def check_accel_criterion(alpha, y, x_tilde, grad_f_xtilde, x_bar, w_bar, eps_bar, sigma, g=None) -> CheckResult:
    y, x_tilde, grad, x_bar, w_bar = (
        np.asarray(a, dtype=np.float64) for a in (y, x_tilde, grad_f_xtilde, x_bar, w_bar)
    )
    expected = x_tilde - alpha * grad
    if not np.allclose(y, expected, rtol=1e-12, atol=1e-12):
        raise PreconditionError("y must equal x_tilde - alpha * grad f(x_tilde)")
    _membership(g, x_bar, w_bar, eps_bar)
    lhs, rhs = AccelCriterion(sigma, x_tilde, grad).measure(alpha, y, x_bar, w_bar, eps_bar)
    return CheckResult(_passes(lhs, rhs, _roundoff(y, x_bar, alpha * w_bar)), lhs, rhs)


def r_to_e(r: float, alpha: float, squared: bool = False) -> float:
    """e-optimality level implied by an r-approximate prox.

    ``squared=False`` gives ``r / (2 alpha)``; ``squared=True`` gives the
    strong-convexity bound ``r**2 / (2 alpha)``, which is valid for every r.
    The two coincide in validity for ``r <= 1``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if r < 0:
        raise ValueError("r must be nonnegative")
    return (r * r if squared else r) / (2.0 * alpha)


def prox_objective(g: FunctionOracle, alpha, y, x) -> float:
    """``g(x) + ||x - y||^2 / (2 alpha)``."""
    return g.value(x) + sqnorm(np.asarray(x) - y) / (2.0 * alpha)


def e_optimality_excess(g: FunctionOracle, alpha, y, x, exact=None) -> float:
    """How far ``x`` is above the minimum of the proximal objective."""
    y = np.asarray(y, dtype=np.float64)
    if exact is None:
        exact = g.prox(alpha, y)
    return prox_objective(g, alpha, y, x) - prox_objective(g, alpha, y, exact)


# ------------------------------------------------------ segment line search

def solve_prox_segment(g: FunctionOracle, alpha, y, criterion, samples: int = 32) -> ProxCertificate:
    """Inexact prox for a ``g`` with exact prox, by search on ``[prox(y), y]``.

    The segment is sampled at ``samples`` evenly spaced points and the point
    farthest from the exact prox whose triplet passes ``criterion`` is
    returned; the exact prox itself always passes.

    Triplets: under ``RAbsolute`` and ``AbsoluteGap`` the witness is the
    subgradient at ``x_bar`` closest to ``(y - x_bar)/alpha`` (``eps_bar = 0``);
    under the relative criteria it is the exact-prox subgradient
    ``(y - p)/alpha``, which lies in the eps_bar-subdifferential at ``x_bar``
    with ``eps_bar = g(x_bar) - g(p) - <w_bar, x_bar - p>``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    y = np.asarray(y, dtype=np.float64)
    p = g.prox(alpha, y)
    d = y - p
    w_exact = d / alpha
    phi_p = prox_objective(g, alpha, y, p) if isinstance(criterion, AbsoluteGap) else None
    tried = 0
    for t in np.linspace(1.0, 0.0, samples):
        tried += 1
        exact = t == 0.0
        x_bar = p + t * d if not exact else p.copy()
        if isinstance(criterion, (RAbsolute, AbsoluteGap)):
            w_bar = g.closest_subgradient(x_bar, (y - x_bar) / alpha)
            eps_bar = 0.0
        else:
            w_bar = w_exact
            eps_bar = 0.0 if exact else induced_eps_from_subgradient(g, p, w_exact, x_bar)
        gap = None
        if phi_p is not None:
            gap = 0.0 if exact else max(prox_objective(g, alpha, y, x_bar) - phi_p, 0.0)
        if exact:
            # residual is zero by construction; only roundoff would remain
            rhs = criterion.measure(alpha, y, x_bar, w_bar, eps_bar, gap=gap)[1]
            return ProxCertificate(x_bar, w_bar, 0.0, criterion, 0.0, rhs, tried, gap=gap)
        lhs, rhs = criterion.measure(alpha, y, x_bar, w_bar, eps_bar, gap=gap)
        if _passes(lhs, rhs):
            return ProxCertificate(x_bar, w_bar, eps_bar, criterion, lhs, rhs, tried, gap=gap)
    raise AssertionError("unreachable: the exact prox always passes")


def solve_prox_absolute(g: FunctionOracle, alpha, y, r, samples: int = 32) -> ProxCertificate:
    """r-approximate prox by line search between ``prox(y)`` and ``y``."""
    return solve_prox_segment(g, alpha, y, RAbsolute(r), samples=samples)


# -------------------------------------------------------- TV dual machinery

@dataclass
class DualIterate:
    v: np.ndarray
    primal: np.ndarray
    gap: float


def _project_blocks(v, tau):
    mag = np.sqrt(v[0] ** 2 + v[1] ** 2)
    scale = np.maximum(mag / tau, 1.0) if tau > 0 else np.where(mag > 0, np.inf, 1.0)
    return v / scale


def _gap_at(alpha, y, v, tau, shape):
    gv = gradient_adjoint(v, shape)
    z = y - alpha * gv
    tau_tol = tau * (1.0 + 1e-10)
    if np.any(np.sqrt(v[0] ** 2 + v[1] ** 2) > tau_tol):
        return z, gv, np.inf
    dz = discrete_gradient(z, shape)
    # g(z) + omega^*(v) - <grad^* v, z>, with omega^* the indicator of the tau-balls
    gap = tau * float(np.sum(np.sqrt(dz[0] ** 2 + dz[1] ** 2))) - float(np.sum(v * dz))
    if -1e-10 <= gap < 0.0:
        gap = 0.0
    return z, gv, gap


def tv_dual_gap(alpha, y, v, tau, shape) -> float:
    """Duality gap ``G(y - alpha grad^* v, v)`` for the TV prox at ``y``.

    Infinite when some dual block leaves the tau-ball.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).reshape((2,) + tuple(shape))
    return _gap_at(alpha, y, v, tau, shape)[2]


def solve_prox_tv_dual(alpha, y, tau, criterion, max_inner: int, shape, v0=None, keep_trace: bool = False) -> ProxCertificate:
    """Certified inexact prox of ``alpha * TV`` by FISTA on the dual.

    Each inner step yields ``x_bar = y - alpha grad^* v``, ``w_bar = grad^* v``
    and ``eps_bar`` = the duality gap (``w_bar`` is then an eps_bar-subgradient
    of TV at ``x_bar``). The candidate triplet is the lowest-gap dual iterate
    seen so far, so candidate gaps never increase. Inner iteration 1 is the
    starting point ``v0`` (zero by default). Returns the first candidate that
    passes ``criterion``, else the last one with ``flagged=True``.
    """
    if max_inner < 1:
        raise ValueError("max_inner must be >= 1")
    shape = (int(shape[0]), int(shape[1]))
    y = np.asarray(y, dtype=np.float64).ravel()
    step = 1.0 / (8.0 * alpha)
    v = np.zeros((2,) + shape) if v0 is None else _project_blocks(np.array(v0, dtype=np.float64).reshape((2,) + shape), tau)
    trace = [] if keep_trace else None

    def certificate(v, z, gv, gap, l, flagged=False):
        lhs, rhs = criterion.measure(alpha, y, z, gv, gap, gap=gap)
        return ProxCertificate(z, gv, gap, criterion, lhs, rhs, l, flagged=flagged, gap=gap, dual=v, gap_trace=trace)

    z, gv, gap = _gap_at(alpha, y, v, tau, shape)
    best = (v, z, gv, gap)
    if trace is not None:
        trace.append(gap)
    lhs, rhs = criterion.measure(alpha, y, z, gv, gap, gap=gap)
    if _passes(lhs, rhs):
        return certificate(*best, 1)
    w = v.copy()
    t = 1.0
    for l in range(2, max_inner + 1):
        zw = y - alpha * gradient_adjoint(w, shape)
        v_new = _project_blocks(w + step * discrete_gradient(zw, shape), tau)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        w = v_new + ((t - 1.0) / t_new) * (v_new - v)
        v, t = v_new, t_new
        z, gv, gap = _gap_at(alpha, y, v, tau, shape)
        if gap < best[3]:
            best = (v, z, gv, gap)
            lhs, rhs = criterion.measure(alpha, y, z, gv, gap, gap=gap)
            if trace is not None:
                trace.append(gap)
            if _passes(lhs, rhs):
                return certificate(*best, l)
        elif trace is not None:
            trace.append(best[3])
    return certificate(*best, max_inner, flagged=True)
