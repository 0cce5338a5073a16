"""Invariant suites behind ``proxeps verify``.

Each suite returns a list of ``Check`` results; a suite passes when every
check does. The suites are small and seeded so they run in seconds.
"""

from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np

from ..core import norm
from ..oracles import L1Norm, LeastSquares, eps_subdiff_interval_abs
from ..operators import adjoint_mismatch, gaussian_blur, gradient_operator
from ..problems import make_lasso, reference_solve
from ..prox import (
    AbsoluteGap,
    RAbsolute,
    SigmaApprox,
    SigmaQuasi,
    e_optimality_excess,
    r_to_e,
    solve_prox_segment,
    solve_prox_tv_dual,
    tv_dual_gap,
)
from ..solvers import (
    InvariantViolation,
    SolverConfig,
    SummabilityWarning,
    accel_bound,
    accel_run,
    accel_t_lower,
    pesm1_run,
    pesm2_run,
    rate_bound_series,
    verify_descent_lemma,
)
from ..stepsize import Diminishing, PowerSchedule


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def _grid_interval(t, eps, grid):
    """Brute-force eps-subdifferential of |.| at t over a grid of slopes."""
    probes = np.linspace(-50.0, 50.0, 2001)
    ok = [v for v in grid if np.all(np.abs(probes) >= abs(t) + v * (probes - t) - eps - 1e-12)]
    return (min(ok), max(ok)) if ok else (math.nan, math.nan)


def suite_oracles(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    out = []
    grid = np.linspace(-1.0, 1.0, 401)
    worst = 0.0
    for _ in range(40):
        t, eps = rng.uniform(-3, 3), rng.uniform(0, 2)
        lo, hi = eps_subdiff_interval_abs(t, eps)
        glo, ghi = _grid_interval(t, eps, grid)
        worst = max(worst, abs(lo - glo), abs(hi - ghi))
    out.append(Check("abs interval vs grid", worst <= 0.0051, f"max endpoint error {worst:.2e} (grid step 5e-3)"))

    g = L1Norm(1.0, dim=6)
    bad = 0
    for _ in range(50):
        x, eps = rng.standard_normal(6), rng.uniform(0, 1)
        if not g.is_eps_subgradient(x, g.eps_subgradient(x, eps, rng), eps):
            bad += 1
    out.append(Check("l1 sampled eps-subgradients", bad == 0, f"{bad} failures of 50"))

    A = rng.standard_normal((5, 5))
    f = LeastSquares(A, rng.standard_normal(5))
    bad = 0
    for _ in range(50):
        x, eps = rng.standard_normal(5), rng.uniform(0, 1)
        if not f.is_eps_subgradient(x, f.eps_subgradient(x, eps, rng), eps):
            bad += 1
    out.append(Check("least-squares sampled eps-subgradients", bad == 0, f"{bad} failures of 50"))

    m = max(adjoint_mismatch(gaussian_blur((12, 12)), rng), adjoint_mismatch(gradient_operator((12, 12)), rng))
    out.append(Check("blur and gradient adjoints", m < 1e-10, f"mismatch {m:.1e}"))
    return out


def suite_prox(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    g = L1Norm(1.0, dim=1)
    out = []
    nest_bad = dist_bad = conv_bad = 0
    for _ in range(200):
        alpha, y = rng.uniform(0.05, 3), rng.uniform(-5, 5, 1)
        sigma, r = rng.uniform(0, 0.99), rng.uniform(0, 1)
        c = solve_prox_segment(g, alpha, y, SigmaApprox(sigma))
        lhs, rhs = SigmaQuasi(sigma).measure(alpha, y, c.x_bar, c.w_bar, c.eps_bar)
        nest_bad += lhs > rhs * (1 + 1e-12) + 1e-15
        c = solve_prox_segment(g, alpha, y, RAbsolute(r))
        exact = g.prox(alpha, y)
        dist_bad += norm(c.x_bar - exact) > r * (1 + 1e-12) + 1e-15
        conv_bad += e_optimality_excess(g, alpha, y, c.x_bar, exact) > r_to_e(r, alpha) + 1e-12
    out.append(Check("sigma-approx implies quasi", nest_bad == 0, f"{nest_bad} failures of 200"))
    out.append(Check("r-approx distance bound", dist_bad == 0, f"{dist_bad} failures of 200"))
    out.append(Check("r to e conversion", conv_bad == 0, f"{conv_bad} failures of 200"))

    shape = (10, 10)
    y = rng.uniform(0, 1, 100)
    cert = solve_prox_tv_dual(0.5, y, 0.2, AbsoluteGap(1e-6), 2000, shape, keep_trace=True)
    trace = np.array(cert.gap_trace)
    mono = bool(np.all(np.diff(trace) <= 0))
    g0 = tv_dual_gap(0.5, y, np.zeros((2,) + shape), 0.2, shape)
    out.append(Check("tv candidate gaps non-increasing", mono and not cert.flagged,
                     f"{len(trace)} inner steps, final gap {trace[-1]:.2e}, start gap {g0:.2e}"))
    return out


def suite_lemmas(seed: int = 0) -> list:
    out = []
    worst_lemma = worst_rate = math.inf
    for n, s in ((2, seed), (5, seed + 1), (10, seed + 2)):
        prob = make_lasso(n, s)
        ref = reference_solve(prob)
        for kind in ("pesm1", "pesm2"):
            cfg = SolverConfig(
                stepsize=Diminishing(1.0 / prob.L, 1.0), max_outer=100, eps_schedule=PowerSchedule(1.0),
                r_schedule=PowerSchedule(1.0), sigma=0.5 if kind == "pesm2" else 0.0, eps_mode="sampled",
                seed=s, x_ref=ref.x_star,
            )
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SummabilityWarning)
                res = (pesm1_run if kind == "pesm1" else pesm2_run)(prob, cfg)
            bounds = rate_bound_series(res.records, ref.d0, relative=kind == "pesm2")
            for rec, bound in zip(res.records, bounds):
                scale = max(1.0, abs(rec.func_val), abs(ref.s_star))
                slack = verify_descent_lemma(rec, ref.x_star, ref.s_star, raise_on_violation=False)
                worst_lemma = min(worst_lemma, slack / scale)
                gap = rec.best_val - ref.s_star
                worst_rate = min(worst_rate, (bound - gap) / scale)
    out.append(Check("descent inequality", worst_lemma >= -1e-9, f"min normalized slack {worst_lemma:.2e}"))
    out.append(Check("rate bounds", worst_rate >= -1e-9, f"min normalized slack {worst_rate:.2e}"))
    return out


def suite_accel(seed: int = 0) -> list:
    out = []
    msgs, ok = [], True
    for n in (5, 20):
        prob = make_lasso(n, seed)
        ref = reference_solve(prob)
        for s2 in (0.1, 0.45):
            cfg = SolverConfig(sigma2=s2, max_outer=300, check_invariants=True)
            try:
                res = accel_run(prob, cfg)
            except InvariantViolation as exc:
                ok = False
                msgs.append(f"n={n} sigma2={s2}: {exc}")
                continue
            for st in res.accel_trace:
                if st.t < accel_t_lower(prob.L, s2, st.k):
                    ok = False
                if st.F_bar - ref.s_star > accel_bound(prob.L, s2, ref.d0, st.k) + 1e-9 * max(1.0, abs(st.F_bar)):
                    ok = False
                    msgs.append(f"n={n} sigma2={s2}: rate bound fails at k={st.k}")
                    break
    out.append(Check("accelerated invariants and rate", ok, "; ".join(msgs) or "all iterations"))
    return out


SUITES = {
    "oracles": suite_oracles,
    "prox": suite_prox,
    "lemmas": suite_lemmas,
    "accel": suite_accel,
}


def run_suite(name: str, seed: int = 0) -> list:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(seed)
