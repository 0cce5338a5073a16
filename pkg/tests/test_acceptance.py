"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import time
import warnings

import numpy as np
import pytest

from grid_oracles import abs_eps_interval, ista_certified, prox_abs_grid
from proxeps.harness.config import ExperimentConfig
from proxeps.harness.runner import numeric_columns, run_experiment
from proxeps.oracles import L1Norm, eps_subdiff_interval_abs
from proxeps.prox import (
    SigmaApprox,
    check_sigma_approximate,
    check_sigma_quasi_approximate,
    r_to_e,
    solve_prox_absolute,
    solve_prox_segment,
)
from proxeps.problems import make_lasso, make_toy1d, make_tv_deblur, reference_solve
from proxeps.solvers import (
    RelativeDiff,
    SolverConfig,
    SummabilityWarning,
    TargetGap,
    accel_run,
    accel_t_lower,
    ipgm_run,
    pesm1_run,
    pesm2_run,
    pss_run,
    rate_bound_accel,
    rate_bound_series,
    verify_descent_lemma,
)
from proxeps.stepsize import Constant, Diminishing, PolyakExact, PowerSchedule

LASSO_SIZES = (2, 5, 10, 50)
LASSO_SEEDS = range(5)


def _scale(v):
    return max(1.0, abs(v))


# --------------------------------------------------- criteria 1 and 2 share runs

@pytest.fixture(scope="module")
def lemma_runs():
    t0 = time.perf_counter()
    runs = []
    for n in LASSO_SIZES:
        for seed in LASSO_SEEDS:
            p = make_lasso(n, seed)
            ref = reference_solve(p)
            common = dict(stepsize=Diminishing(1.0 / p.L, 1.0), max_outer=200, eps_schedule=PowerSchedule(1.0, 1.0),
                          eps_mode="sampled", seed=seed, x_ref=ref.x_star, store_vectors=True)
            runs.append((p, ref, "pesm1", pesm1_run(p, SolverConfig(r_schedule=PowerSchedule(1.0, 1.0), **common))))
            for sigma in (0.3, 0.9):
                runs.append((p, ref, "pesm2", pesm2_run(p, SolverConfig(sigma=sigma, **common))))
    return runs, time.perf_counter() - t0


def test_criterion_01_descent_lemma(lemma_runs, report):
    runs, elapsed = lemma_runs
    t0 = time.perf_counter()
    worst = np.inf
    for _, ref, _, res in runs:
        assert len(res.records) == 200
        for r in res.records:
            slack = verify_descent_lemma(r, ref.x_star, ref.s_star)
            worst = min(worst, slack / (1e-9 * _scale(r.func_val)))
    total = elapsed + time.perf_counter() - t0
    ok = worst >= -1.0 and total < 30.0
    report(1, "descent lemma slack on 20 lasso instances", ok,
           f"{len(runs)} runs, min slack/(1e-9 scale) = {worst:.3g}, {total:.1f} s")


def test_criterion_02_rate_bounds(lemma_runs, report):
    runs, _ = lemma_runs
    worst = -np.inf
    for _, ref, kind, res in runs:
        bounds = rate_bound_series(res.records, ref.d0, relative=kind == "pesm2")
        for r, b in zip(res.records, bounds):
            worst = max(worst, (r.best_val - ref.s_star - b) / (1e-9 * _scale(r.func_val)))
    seen, cross = set(), 0.0
    for p, ref, _, _ in runs:
        if id(p) in seen:
            continue
        seen.add(id(p))
        _, F_ista = ista_certified(p.meta["A"], p.meta["b"])
        cross = max(cross, abs(F_ista - ref.s_star))
    ok = worst <= 1.0 and cross <= 1e-8
    report(2, "best value within rate bounds, s_star cross-checked", ok,
           f"max excess/(1e-9 scale) = {worst:.3g}, |s_star - ISTA| <= {cross:.2e}")


# -------------------------------------------------------------- criterion 3

def test_criterion_03_fejer_polyak_exact(report):
    worst_fejer, worst_gap = -np.inf, 0.0
    for seed in range(3):
        p = make_lasso(10, seed)
        ref = reference_solve(p)
        for sigma in (0.0, 0.02):
            res = pesm2_run(p, SolverConfig(stepsize=PolyakExact(1.0, 1.0, s_star=ref.s_star), sigma=sigma,
                                            max_outer=5000, x_ref=ref.x_star, store_vectors=False))
            worst_fejer = max(worst_fejer, max(r.dist_next - r.dist_ref for r in res.records))
            worst_gap = max(worst_gap, p.F(res.x) - ref.s_star)
    ok = worst_fejer <= 1e-10 and worst_gap <= 1e-6
    report(3, "Fejer monotone under exact Polyak steps", ok,
           f"max dist increase {worst_fejer:.2e}, final gap {worst_gap:.2e}")


# -------------------------------------------------------------- criterion 4

def test_criterion_04_constant_step_neighborhood(report):
    alpha, sigma = 1e-3, 0.5
    p = make_lasso(5, 0)
    ref = reference_solve(p)
    cfg = dict(stepsize=Constant(alpha), max_outer=10_000, store_vectors=False)
    r1 = pesm1_run(p, SolverConfig(**cfg))
    r2 = pesm2_run(p, SolverConfig(sigma=sigma, **cfg))
    c1, c2 = r1.tracker.c, r2.tracker.c
    C_sigma = sigma**2 / (1 - sigma) ** 2 + 4
    b1 = ref.s_star + 2 * alpha * c1**2 + 1e-6
    b2 = ref.s_star + alpha * c2**2 * C_sigma / 2 + 1e-6
    m1, m2 = min(r.func_val for r in r1.records), min(r.func_val for r in r2.records)
    ok = len(r1.records) == len(r2.records) == 10_000 and m1 <= b1 and m2 <= b2
    report(4, "constant-step neighborhood", ok,
           f"alg1 {m1 - ref.s_star:.2e} <= {b1 - ref.s_star:.2e}, alg2 {m2 - ref.s_star:.2e} <= {b2 - ref.s_star:.2e}")


# -------------------------------------------------------------- criterion 5

def test_criterion_05_accelerated_invariants(report):
    fails = []
    for n in (5, 50):
        p = make_lasso(n, 0)
        ref = reference_solve(p)
        for s2 in (0.1, 0.25, 0.45):
            res = accel_run(p, SolverConfig(sigma2=s2, max_outer=500, check_invariants=True))
            prev = -np.inf
            for st in res.accel_trace:
                if st.t < accel_t_lower(p.L, s2, st.k):
                    fails.append(("t", n, s2, st.k))
                gap = st.eta - st.t * st.F_bar
                if gap < prev - 1e-9 * _scale(st.eta):
                    fails.append(("eta", n, s2, st.k))
                prev = max(prev, gap)
                if st.F_bar - ref.s_star > rate_bound_accel(st, ref.d0, st.k) + 1e-9 * _scale(st.F_bar):
                    fails.append(("rate", n, s2, st.k))
                if st.argmin_gap > 1e-9 * _scale(np.linalg.norm(st.x)):
                    fails.append(("argmin", n, s2, st.k))
    trace = accel_run(make_toy1d(), SolverConfig(sigma2=0.25, max_outer=2)).accel_trace
    hand = abs(trace[0].beta - 0.1875) <= 1e-6 and abs(trace[1].beta - 0.303382) <= 1e-6
    hand = hand and abs(trace[0].t - 0.1875) <= 1e-6 and abs(trace[1].t - 0.490881) <= 1e-6
    report(5, "accelerated invariants and hand-derived recursion", not fails and hand,
           f"violations {fails[:3]}, beta2 {trace[1].beta:.6f}, t2 {trace[1].t:.6f}")


# -------------------------------------------------------------- criterion 6

def test_criterion_06_acceleration_beats_baseline(report):
    p = make_lasso(50, 0)
    ref = reference_solve(p)
    stop = TargetGap(ref.s_star, 1e-4)
    acc = accel_run(p, SolverConfig(sigma2=0.45, max_outer=50_000, stop=stop, store_vectors=False))
    k_acc = acc.iterations
    reached = acc.stop_reason == "stop-rule"
    # IPGM gets exactly as many outer iterations; if it has not hit the target by then it needs strictly more
    ipg = ipgm_run(p, SolverConfig(max_outer=k_acc, stop=stop, ipgm_beta="zero",
                                   e_schedule=PowerSchedule(1e-6, 3.0, squared=True), store_vectors=False))
    ipgm_gap = p.F(ipg.x) - ref.s_star
    ok = reached and ipg.stop_reason != "stop-rule" and ipgm_gap > 1e-4
    report(6, "accelerated method needs fewer outer iterations than IPGM", ok,
           f"accel {k_acc} its; IPGM gap after {ipg.iterations} its = {ipgm_gap:.2e}")


# -------------------------------------------------------------- criterion 7

def test_criterion_07_prox_criteria_vs_grid(report):
    rng = np.random.default_rng(7)
    g = L1Norm(1.0, dim=1)
    bad = []
    for i in range(1000):
        alpha, y = rng.uniform(0.05, 5.0), rng.uniform(-6.0, 6.0)
        r, sigma = rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.99)
        z = np.array([y])
        c = solve_prox_segment(g, alpha, z, SigmaApprox(sigma))
        if not (check_sigma_approximate(alpha, z, c.x_bar, c.w_bar, c.eps_bar, sigma, g).passed
                and check_sigma_quasi_approximate(alpha, z, c.x_bar, c.w_bar, c.eps_bar, sigma, g).passed):
            bad.append(("nesting", i))
        p = prox_abs_grid(alpha, y)
        x = solve_prox_absolute(g, alpha, z, r).x_bar[0]
        # grid minimizers resolve to about sqrt(machine eps) relative
        if abs(x - p) > r + 1e-7 * _scale(y):
            bad.append(("distance", i))
        excess = (alpha * abs(x) + 0.5 * (x - y) ** 2) - (alpha * abs(p) + 0.5 * (p - y) ** 2)
        if excess / alpha > r_to_e(r, alpha) + 1e-9:
            bad.append(("conversion", i))
    worst = 0.0
    for t, eps in zip(rng.uniform(-20, 20, 1000), rng.uniform(0, 30, 1000)):
        lo, hi = eps_subdiff_interval_abs(t, eps)
        glo, ghi = abs_eps_interval(t, eps)
        worst = max(worst, abs(lo - glo), abs(hi - ghi))
    ok = not bad and worst <= 1e-7
    report(7, "prox criteria and eps-interval vs grid brute force", ok,
           f"{len(bad)} failures in 1000 prox instances, interval error {worst:.1e}")


# -------------------------------------------------------------- criterion 8

def _tv_inner_totals(tau, seed=0):
    p = make_tv_deblur(32, tau=tau, noise_std=1e-4, seed=seed)
    base = dict(stop=RelativeDiff(1e-3), max_outer=5000, max_inner=3000, store_vectors=False)
    pesm2 = {}
    for s2 in (0.1, 0.9):
        res = pesm2_run(p, SolverConfig(stepsize=Constant(1.0 / p.L), sigma=float(np.sqrt(s2)), **base))
        pesm2[s2] = res.inner_total
    ipgm = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SummabilityWarning)
        for q in (1.1, 1.9):
            ipgm[q] = ipgm_run(p, SolverConfig(e_schedule=PowerSchedule(1.0, q, squared=True), **base)).inner_total
    return pesm2, ipgm


def test_criterion_08_tv_sensitivity_trend(report):
    t0 = time.perf_counter()
    # desk-scale weight: tau^2 * pixel count matched to a 256 x 256 image at tau = 1e-4
    pesm2, ipgm = _tv_inner_totals(8e-4)
    r_pesm2, r_ipgm = pesm2[0.1] / pesm2[0.9], ipgm[1.9] / ipgm[1.1]
    info_p, info_i = _tv_inner_totals(1e-4)
    print(f"  info: tau=1e-4 ratios: PeSM2 {info_p[0.1] / info_p[0.9]:.2f}, IPGM1 {info_i[1.9] / info_i[1.1]:.2f}")
    elapsed = time.perf_counter() - t0
    ok = r_pesm2 < 4.0 and r_ipgm > 4.0 and elapsed < 300.0
    report(8, "TV inner-iteration trend", ok,
           f"PeSM2 IntIt {pesm2[0.1]}/{pesm2[0.9]} = {r_pesm2:.2f}, IPGM1 IntIt {ipgm[1.9]}/{ipgm[1.1]} = "
           f"{r_ipgm:.2f}, {elapsed:.1f} s")


# -------------------------------------------------------------- criterion 9

def test_criterion_09_exactness_reductions(report):
    p = make_lasso(5, 0)
    cfg = dict(stepsize=Diminishing(1.0 / p.L, 1.0), max_outer=200)
    base = pss_run(p, SolverConfig(**cfg))
    worst = 0.0
    for res in (pesm1_run(p, SolverConfig(**cfg)), pesm2_run(p, SolverConfig(sigma=0.0, **cfg))):
        assert len(res.records) == len(base.records)
        for a, b in zip(res.records, base.records):
            worst = max(worst, float(np.max(np.abs(a.x_next - b.x_next))))
    report(9, "exact settings reproduce the projected subgradient baseline", worst <= 1e-12,
           f"max iterate difference {worst:.1e}")


# ------------------------------------------------------------- criterion 10

def test_criterion_10_determinism(report):
    configs = [
        ExperimentConfig(problem="lasso", n=6, algo=a, max_outer=60, eps_mode="sampled", seed=4)
        for a in ("pesm1", "pesm2", "pss", "accel", "ipgm")
    ] + [ExperimentConfig(problem="tv", n=8, algo="pesm2", max_outer=10, tau=1e-2)]
    same = []
    for cfg in configs:
        a = run_experiment(cfg, write=False).csv_text
        b = run_experiment(cfg, write=False).csv_text
        same.append(numeric_columns(a) == numeric_columns(b))
    report(10, "repeated runs give identical CSV numeric columns", all(same), f"{sum(same)}/{len(same)} configs")
