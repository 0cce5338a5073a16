"""Stepsize rules and nonnegative parameter schedules.

Iteration indices handed to schedules and diminishing steps are 1-based;
index 0 is treated as 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class EstimateViolationError(ValueError):
    """Polyak numerator ``F(x) - s_k - eps_k`` is not positive."""


class StationarityError(ZeroDivisionError):
    """Polyak denominator vanished: ``u + w = 0`` and no sigma term."""


# ---------------------------------------------------------------- schedules

@dataclass(frozen=True)
class PowerSchedule:
    """``coef / k**power`` (and its square when ``squared``), k >= 1."""

    coef: float
    power: float = 1.0
    squared: bool = False

    def __call__(self, k: int) -> float:
        v = self.coef / max(int(k), 1) ** self.power
        return v * v if self.squared else v

    def square_summable(self) -> bool:
        p = 2 * self.power * (2 if self.squared else 1)
        return self.coef == 0 or p > 1


@dataclass(frozen=True)
class ConstantSchedule:
    value: float = 0.0

    def __call__(self, k: int) -> float:
        return self.value


ZERO = ConstantSchedule(0.0)


def parse_schedule(spec: str):
    """Parse ``0``, ``const:V``, ``pow:C:P`` (C/k^P) or ``sqpow:C:P`` ((C/k^P)^2)."""
    spec = str(spec).strip()
    if spec in ("0", "zero", "none"):
        return ZERO
    head, _, rest = spec.partition(":")
    args = [float(a) for a in rest.split(":")] if rest else []
    if head == "const" and len(args) == 1:
        return ConstantSchedule(args[0])
    if head in ("pow", "inv") and len(args) in (1, 2):
        return PowerSchedule(args[0], args[1] if len(args) == 2 else 1.0)
    if head == "sqpow" and len(args) == 2:
        return PowerSchedule(args[0], args[1], squared=True)
    raise ValueError(f"bad schedule spec {spec!r}")


# ---------------------------------------------------------- step formulas

def _check_gamma(gamma, lo=None, hi=None):
    if not 0 < gamma < 2:
        raise ValueError(f"gamma must lie in (0, 2), got {gamma}")
    if lo is not None and gamma < lo:
        raise ValueError(f"gamma {gamma} below its lower bound {lo}")
    if hi is not None and gamma > hi:
        raise ValueError(f"gamma {gamma} above its upper bound {hi}")


def step_constant(alpha: float) -> float:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return float(alpha)


def step_diminishing(alpha0: float, p: float, k: int) -> float:
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return alpha0 / max(int(k), 1) ** p


def step_polyak_alg1(gamma, F_xk, s_k, eps_k, u_plus_w_normsq) -> float:
    _check_gamma(gamma)
    num = F_xk - s_k - eps_k
    if not num > 0:
        raise EstimateViolationError(f"F(x) - s_k - eps_k = {num:.3e} <= 0")
    if u_plus_w_normsq <= 0:
        raise StationarityError("||u + w||^2 = 0")
    return gamma * num / u_plus_w_normsq


def sigma_term(sigma: float, c: float) -> float:
    """``sigma^2 c^2 / (1 - sigma)^2``."""
    if not 0 <= sigma < 1:
        raise ValueError("sigma must lie in [0, 1)")
    return sigma * sigma * c * c / (1.0 - sigma) ** 2


def step_polyak_alg2(gamma, F_xk, s_k, eps_k, u_plus_w_normsq, sigma, c) -> float:
    _check_gamma(gamma)
    if not c > 0:
        raise ValueError("c must be positive")
    num = F_xk - s_k - eps_k
    if not num > 0:
        raise EstimateViolationError(f"F(x) - s_k - eps_k = {num:.3e} <= 0")
    denom = sigma_term(sigma, c) + u_plus_w_normsq
    if denom <= 0:
        raise StationarityError("Polyak denominator is zero")
    return gamma * num / denom


def step_polyak_exact(gamma, F_xk, s_star, denom, value_tol: float = 0.0) -> float:
    """Polyak step with the optimal value known; 0 once ``F(x) <= s_star + value_tol``."""
    _check_gamma(gamma)
    num = F_xk - s_star
    if num <= value_tol:
        return 0.0
    if denom <= 0:
        raise StationarityError("Polyak denominator is zero")
    return gamma * num / denom


# ---------------------------------------------------------------- policies

@dataclass
class EstimateSequence:
    """Non-increasing estimates ``s_k`` of the optimal value.

    ``s_k = limit + (s0 - limit) * rate**k``, capped by the previous value.
    When an estimate is too high for the current point (``s_k + eps_k >=
    F(x^k)``) it is lowered to ``F - eps_k - backoff * max(F - eps_k - limit, tiny)``
    and the limit follows it down if needed.
    """

    s0: float
    limit: float
    rate: float = 0.5
    backoff: float = 0.5
    values: list = field(default_factory=list)
    violations: int = 0

    def __post_init__(self):
        if self.s0 < self.limit:
            raise ValueError("s0 must be >= limit")
        if not 0 <= self.rate < 1:
            raise ValueError("rate must lie in [0, 1)")
        if not 0 < self.backoff < 1:
            raise ValueError("backoff must lie in (0, 1)")

    def next(self, k: int, F_xk: float, eps_k: float) -> float:
        s = self.limit + (self.s0 - self.limit) * self.rate**k
        if self.values:
            s = min(s, self.values[-1])
        if s + eps_k >= F_xk:
            self.violations += 1
            room = F_xk - eps_k - self.limit
            delta = self.backoff * max(room, 1e-12 * max(1.0, abs(F_xk)))
            s = F_xk - eps_k - delta
            self.limit = min(self.limit, s)
        self.values.append(s)
        return s


class StepsizePolicy:
    kind = "abstract"

    def needs_polyak(self) -> bool:
        return False


@dataclass(frozen=True)
class Constant(StepsizePolicy):
    alpha: float
    kind = "constant"

    def __post_init__(self):
        step_constant(self.alpha)

    def step(self, k, **_):
        return self.alpha


@dataclass(frozen=True)
class Diminishing(StepsizePolicy):
    alpha0: float
    p: float = 1.0
    kind = "diminishing"

    def __post_init__(self):
        step_diminishing(self.alpha0, self.p, 1)

    def step(self, k, **_):
        return step_diminishing(self.alpha0, self.p, k)

    def summable_squares(self) -> bool:
        return self.p > 0.5


@dataclass
class _Polyak(StepsizePolicy):
    gamma_lo: float = 1.0
    gamma_hi: float = 1.0

    def __post_init__(self):
        if not 0 < self.gamma_lo <= self.gamma_hi < 2:
            raise ValueError("need 0 < gamma_lo <= gamma_hi < 2")

    def gamma(self, k: int) -> float:
        # alternate between the two bounds; constant when they coincide
        return self.gamma_lo if k % 2 else self.gamma_hi

    def needs_polyak(self) -> bool:
        return True


@dataclass
class PolyakAlg1(_Polyak):
    estimates: EstimateSequence | None = None
    kind = "polyak1"

    def step(self, k, F_xk, eps_k, u_plus_w_normsq, **_):
        s_k = self.estimates.next(k, F_xk, eps_k)
        return step_polyak_alg1(self.gamma(k), F_xk, s_k, eps_k, u_plus_w_normsq)


@dataclass
class PolyakAlg2(_Polyak):
    estimates: EstimateSequence | None = None
    c: float | None = None
    kind = "polyak2"

    def step(self, k, F_xk, eps_k, u_plus_w_normsq, sigma, c, **_):
        s_k = self.estimates.next(k, F_xk, eps_k)
        return step_polyak_alg2(self.gamma(k), F_xk, s_k, eps_k, u_plus_w_normsq, sigma, self.c or c)


@dataclass
class PolyakExact(_Polyak):
    """Polyak step with known optimal value.

    With ``sigma > 0`` (relative-error method) the denominator carries the
    extra ``sigma^2 c^2 / (1 - sigma)^2`` term.
    """

    s_star: float = 0.0
    c: float | None = None
    #: gaps below this count as zero; None means 1e-12 * max(1, |s_star|),
    #: a little above the roundoff in evaluating F near the optimum
    value_tol: float | None = None
    kind = "polyak-exact"

    def step(self, k, F_xk, u_plus_w_normsq, sigma=0.0, c=None, **_):
        denom = u_plus_w_normsq
        if sigma > 0:
            denom += sigma_term(sigma, self.c or c)
        tol = self.value_tol if self.value_tol is not None else 1e-12 * max(1.0, abs(self.s_star))
        return step_polyak_exact(self.gamma(k), F_xk, self.s_star, denom, value_tol=tol)


def diminishing_partial_sums(alpha0: float, p: float, K: int) -> tuple[float, float]:
    """``(sum alpha_k, sum alpha_k^2)`` for k = 1..K."""
    s1 = s2 = 0.0
    for k in range(1, K + 1):
        a = step_diminishing(alpha0, p, k)
        s1 += a
        s2 += a * a
    return s1, s2


def log_lower_bound(alpha0: float, K: int) -> float:
    """Lower bound ``alpha0 * log(K) / 2`` on the harmonic partial sum."""
    return alpha0 * math.log(K) / 2.0
