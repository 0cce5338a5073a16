"""Experiment execution, per-iteration CSV telemetry and summary tables."""

from __future__ import annotations

import csv
import io
import math
import os
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .. import problems as P
from ..prox import prox_objective
from ..solvers import RelativeDiff, SolverConfig, SquaredStep, SummabilityWarning, run
from ..stepsize import (
    Constant,
    Diminishing,
    EstimateSequence,
    PolyakAlg1,
    PolyakAlg2,
    PolyakExact,
    PowerSchedule,
    parse_schedule,
)
from .config import ExperimentConfig, parse_ek, parse_stepsize_spec

CSV_COLUMNS = (
    "iter", "func_val", "best_val", "alpha_k", "eps_k", "eps_bar_k", "residual_lhs",
    "residual_rhs", "inner_iters", "flagged", "rel_diff", "elapsed_ms",
)
SUMMARY_COLUMNS = ("method", "RelDiff", "FuncVal", "CPU", "ExtIt", "IntIt", "Flagged")


@dataclass
class SummaryRow:
    method: str
    rel_diff: float
    func_val: float
    cpu_time: float
    ext_it: int
    int_it: int
    flagged: int = 0
    stop_reason: str = ""

    def __post_init__(self):
        if self.ext_it < 1:
            raise ValueError("a summary row needs at least one outer iteration")


@dataclass
class ExperimentResult:
    summary: SummaryRow
    csv_text: str
    result: object
    problem: object
    config: ExperimentConfig


# ------------------------------------------------------------------ builders

def build_problem(cfg: ExperimentConfig):
    if cfg.problem == "lasso":
        return P.make_lasso(cfg.n, cfg.seed)
    if cfg.problem == "toy1d":
        return P.make_toy1d()
    if cfg.problem == "tv":
        image = None
        if cfg.image:
            from ..pgm import read_pgm

            image = read_pgm(cfg.image)
        return P.make_tv_deblur(N=cfg.n, tau=cfg.tau, noise_std=cfg.noise, seed=cfg.seed, image=image)
    raise ValueError(f"unknown problem {cfg.problem!r}")


def _reference(problem):
    if problem.reference is None:
        problem.reference = P.reference_solve(problem)
    return problem.reference


def build_stepsize(cfg: ExperimentConfig, problem):
    kind, args = parse_stepsize_spec(cfg.stepsize)
    L = float(problem.L)
    if kind == "const":
        return Constant(args[0] if args else 1.0 / L)
    if kind == "dim":
        return Diminishing(args[0] if args else 1.0 / L, args[1] if len(args) > 1 else 1.0)
    gamma = args[0] if args else 1.0
    if kind == "polyak-exact":
        return PolyakExact(gamma, gamma, s_star=_reference(problem).s_star)
    # estimates start at F(x0) and decrease toward a known lower bound (0 here)
    limit = args[1] if len(args) > 1 else 0.0
    est = EstimateSequence(max(problem.F(problem.x0), limit), limit)
    if cfg.algo == "pesm2":
        return PolyakAlg2(gamma, gamma, estimates=est)
    return PolyakAlg1(gamma, gamma, estimates=est)


def _auto_e_schedule(problem, alpha: float, q: float):
    """``(C / k^q)^2`` with ``C^2`` the prox-objective excess of the trivial
    point ``z`` for the first prox argument ``z = x0 - alpha grad f(x0)``."""
    z = problem.x0 - alpha * problem.f.gradient(problem.x0)
    exact = problem.exact_prox(alpha, z)
    excess = prox_objective(problem.g, alpha, z, z) - prox_objective(problem.g, alpha, z, exact)
    return PowerSchedule(math.sqrt(max(excess, 0.0)), q, squared=True)


def build_solver_config(cfg: ExperimentConfig, problem) -> SolverConfig:
    stop = None
    if cfg.stop == "sqstep":
        stop = SquaredStep(cfg.tol)
    elif cfg.stop == "reldiff":
        stop = RelativeDiff(cfg.tol)
    e_kind, e_val = parse_ek(cfg.ek_schedule)
    if e_kind == "auto":
        e_sched = _auto_e_schedule(problem, 1.0 / float(problem.L), e_val)
    else:
        e_sched = e_val
    sigma = math.sqrt(cfg.sigma2) if cfg.algo == "pesm2" else 0.0
    return SolverConfig(
        stepsize=build_stepsize(cfg, problem) if cfg.algo in ("pesm1", "pesm2", "pss") else None,
        max_outer=cfg.max_outer,
        max_inner=cfg.max_inner,
        stop=stop,
        eps_schedule=parse_schedule(cfg.epsk_schedule),
        r_schedule=parse_schedule(cfg.rk_schedule),
        sigma=sigma,
        sigma2=cfg.sigma2 if cfg.algo == "accel" else None,
        e_schedule=e_sched,
        eps_mode=cfg.eps_mode,
        seed=cfg.seed,
        ipgm_beta=cfg.beta,
        store_vectors=False,
    )


def default_label(cfg: ExperimentConfig) -> str:
    if cfg.label:
        return cfg.label
    if cfg.algo == "pesm2":
        return f"pesm2(sigma2={cfg.sigma2:g})"
    if cfg.algo == "accel":
        return f"accel(sigma2={cfg.sigma2:g})"
    if cfg.algo == "ipgm":
        return f"ipgm({cfg.ek_schedule})"
    return cfg.algo


# ---------------------------------------------------------------- telemetry

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, r in enumerate(records, start=1):
        w.writerow([_fmt(v) for v in (
            i, r.func_val, r.best_val, r.alpha_k, r.eps_k, r.eps_bar_k, r.residual_lhs,
            r.residual_rhs, r.inner_iterations, bool(r.flagged), r.rel_diff, 1000.0 * r.elapsed,
        )])
    return buf.getvalue()


def numeric_columns(csv_text: str, drop=("elapsed_ms",)) -> list:
    """Rows of the CSV with the timing column removed, as raw strings."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    keep = [i for i, name in enumerate(rows[0]) if name not in drop]
    return [[row[i] for i in keep] for row in rows]


def _write_text(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Build, solve and summarize one experiment; writes the CSV to ``cfg.out`` if set.

    CPU time is the wall clock of the solve call only.
    """
    cfg = cfg.validate()
    problem = build_problem(cfg)
    scfg = build_solver_config(cfg, problem)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SummabilityWarning)
        t0 = time.perf_counter()
        result = run(cfg.algo, problem, scfg)
        cpu = time.perf_counter() - t0
    if not result.records:
        raise RuntimeError(f"{cfg.algo} stopped before its first iteration ({result.stop_reason})")
    text = records_csv(result.records)
    row = SummaryRow(
        method=default_label(cfg),
        rel_diff=result.records[-1].rel_diff,
        func_val=problem.F(result.x),
        cpu_time=cpu,
        ext_it=result.iterations,
        int_it=result.inner_total,
        flagged=result.flagged_count,
        stop_reason=result.stop_reason,
    )
    if write and cfg.out:
        _write_text(cfg.out, text)
    return ExperimentResult(row, text, result, problem, cfg)


# ------------------------------------------------------------ summary table

def _cells(row: SummaryRow) -> list:
    g = lambda v: "%.6g" % v  # noqa: E731
    return [row.method, g(row.rel_diff), g(row.func_val), g(row.cpu_time), str(row.ext_it),
            str(row.int_it), str(row.flagged)]


def compare_table(rows) -> tuple[str, str]:
    """Aligned text table and CSV with the same cell strings, sorted by method (stable)."""
    rows = list(rows)
    if not rows:
        raise ValueError("compare_table needs at least one row")
    rows = sorted(rows, key=lambda r: r.method)
    cells = [_cells(r) for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(SUMMARY_COLUMNS)]

    def line(vals):
        first = vals[0].ljust(widths[0])
        rest = [v.rjust(w) for v, w in zip(vals[1:], widths[1:])]
        return "  ".join([first, *rest]).rstrip()

    text = "\n".join([line(SUMMARY_COLUMNS), *(line(c) for c in cells)]) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    w.writerows(cells)
    return text, buf.getvalue()


# -------------------------------------------------------------------- batch

def _batch_worker(item):
    name, cfg = item
    res = run_experiment(cfg)
    return name, res.summary


def run_batch(items, out_dir=None, threads: int | None = None) -> list:
    """Run ``(name, config)`` pairs, each writing its own CSV; returns summary rows in input order.

    Parallelism is capped by ``threads`` or the ``PROXEPS_THREADS`` variable (default 1).
    """
    items = list(items)
    for name, cfg in items:
        if out_dir and not cfg.out:
            cfg.out = os.path.join(out_dir, f"{name}.csv")
    if threads is None:
        threads = int(os.environ.get("PROXEPS_THREADS", "1") or 1)
    threads = max(1, min(threads, len(items)))
    if threads == 1:
        done = [_batch_worker(it) for it in items]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            done = list(ex.map(_batch_worker, items))
    return [row for _, row in done]
