"""``proxeps`` command line: run, verify, batch."""

from __future__ import annotations

import argparse
import os
import sys

from .config import ALGORITHMS, PROBLEMS, STOP_RULES, ConfigError, ExperimentConfig, config_from_mapping, load_batch, load_config
from .runner import compare_table, run_batch, run_experiment
from .verify import SUITES, run_suite

# flag name -> config field; every config key is also a flag
_RUN_FLAGS = [
    ("--problem", "problem", dict(choices=PROBLEMS)),
    ("--algo", "algo", dict(choices=ALGORITHMS)),
    ("--n", "n", dict(help="lasso dimension, or image side for tv")),
    ("--seed", "seed", {}),
    ("--tau", "tau", dict(help="TV weight")),
    ("--noise", "noise", dict(help="noise standard deviation for tv")),
    ("--image", "image", dict(metavar="PATH", help="8-bit PGM ground truth for tv")),
    ("--sigma2", "sigma2", {}),
    ("--rk-schedule", "rk_schedule", dict(metavar="SPEC")),
    ("--epsk-schedule", "epsk_schedule", dict(metavar="SPEC")),
    ("--ek-schedule", "ek_schedule", dict(metavar="SPEC", help="IPGM prox error; SPEC or auto:Q")),
    ("--eps-mode", "eps_mode", dict(choices=("exact", "sampled"))),
    ("--beta", "beta", dict(choices=("zero", "nesterov"), help="IPGM extrapolation")),
    ("--stepsize", "stepsize", dict(metavar="SPEC")),
    ("--max-outer", "max_outer", {}),
    ("--max-inner", "max_inner", {}),
    ("--tol", "tol", {}),
    ("--stop", "stop", dict(choices=STOP_RULES)),
    ("--out", "out", dict(metavar="PATH", help="per-iteration CSV")),
    ("--label", "label", {}),
]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="proxeps", description="Inexact proximal epsilon-subgradient experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", metavar="FILE", help="key = value config file; flags override it")
    r.add_argument("--summary", metavar="PATH", help="also write the summary row as CSV")
    for flag, dest, kw in _RUN_FLAGS:
        r.add_argument(flag, dest=dest, default=None, **kw)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    v.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("batch", help="run every section of a batch file")
    b.add_argument("config", metavar="FILE")
    b.add_argument("--out-dir", metavar="DIR", default=None)
    b.add_argument("--threads", type=int, default=None, help="overrides PROXEPS_THREADS")
    return p


def _cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = [(dest, str(getattr(args, dest))) for _, dest, _ in _RUN_FLAGS if getattr(args, dest) is not None]
    cfg = config_from_mapping(overrides, base=cfg)
    res = run_experiment(cfg)
    text, csv_text = compare_table([res.summary])
    sys.stdout.write(text)
    print(f"stop: {res.summary.stop_reason}")
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    return 0


def _cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        for chk in run_suite(name, args.seed):
            print(f"[{'PASS' if chk.passed else 'FAIL'}] {name}: {chk.name} ({chk.detail})")
            failed += not chk.passed
    return 1 if failed else 0


def _cmd_batch(args) -> int:
    items = load_batch(args.config)
    rows = run_batch(items, out_dir=args.out_dir, threads=args.threads)
    text, csv_text = compare_table(rows)
    sys.stdout.write(text)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "summary.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return {"run": _cmd_run, "verify": _cmd_verify, "batch": _cmd_batch}[args.command](args)
    except ConfigError as exc:
        for field, msg in exc.errors:
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
