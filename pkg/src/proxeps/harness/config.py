"""Experiment configuration: flat ``key = value`` files with sections, CLI overrides."""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields

from ..stepsize import parse_schedule

PROBLEMS = ("lasso", "tv", "toy1d")
ALGORITHMS = ("pesm1", "pesm2", "accel", "pss", "ipgm")
STOP_RULES = ("sqstep", "reldiff", "none")


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists ``(field, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.errors))


@dataclass
class ExperimentConfig:
    # problem
    problem: str = "lasso"
    n: int | None = None
    seed: int = 0
    tau: float = 1e-4
    noise: float = 1e-4
    image: str | None = None
    # solver
    algo: str = "pesm1"
    stepsize: str | None = None
    sigma2: float | None = None
    rk_schedule: str | None = None
    epsk_schedule: str | None = None
    ek_schedule: str | None = None
    eps_mode: str = "sampled"
    beta: str = "zero"
    # budgets and stopping
    max_outer: int | None = None
    max_inner: int = 3000
    stop: str | None = None
    tol: float | None = None
    # output
    out: str | None = None
    label: str | None = None

    # problem-dependent defaults, filled by resolved()
    def resolved(self) -> "ExperimentConfig":
        c = ExperimentConfig(**{f.name: getattr(self, f.name) for f in fields(self)})
        tv = c.problem == "tv"
        if c.n is None:
            c.n = 32 if tv else 5
        if c.stepsize is None:
            c.stepsize = "const" if tv else "dim"
        if c.epsk_schedule is None:
            c.epsk_schedule = "0" if tv else "pow:1:1"
        if c.rk_schedule is None:
            c.rk_schedule = "0" if tv else "pow:1:1"
        if c.ek_schedule is None:
            c.ek_schedule = "sqpow:1:1.5"
        if c.sigma2 is None:
            c.sigma2 = 0.25
        if c.stop is None:
            c.stop = "reldiff" if tv else "sqstep"
        if c.tol is None:
            c.tol = 1e-3 if tv else 1e-4
        if c.max_outer is None:
            c.max_outer = 5000 if tv else 2000
        return c

    def validate(self) -> "ExperimentConfig":
        """Return the resolved config or raise ``ConfigError`` naming every bad field."""
        c = self.resolved()
        errs = []
        if c.problem not in PROBLEMS:
            errs.append(("problem", f"must be one of {', '.join(PROBLEMS)}"))
        if c.algo not in ALGORITHMS:
            errs.append(("algo", f"must be one of {', '.join(ALGORITHMS)}"))
        if c.stop not in STOP_RULES:
            errs.append(("stop", f"must be one of {', '.join(STOP_RULES)}"))
        if c.eps_mode not in ("exact", "sampled"):
            errs.append(("eps_mode", "must be 'exact' or 'sampled'"))
        if c.beta not in ("zero", "nesterov"):
            errs.append(("beta", "must be 'zero' or 'nesterov'"))
        if c.n < (4 if c.problem == "tv" else 1):
            errs.append(("n", "must be >= 4 for tv (image side) and >= 1 otherwise"))
        if c.max_outer < 1:
            errs.append(("max_outer", "must be >= 1"))
        if c.max_inner < 1:
            errs.append(("max_inner", "must be >= 1"))
        if not c.tol > 0:
            errs.append(("tol", "must be positive"))
        if c.tau < 0:
            errs.append(("tau", "must be nonnegative"))
        if c.noise < 0:
            errs.append(("noise", "must be nonnegative"))
        if c.algo == "accel" and not 0 < c.sigma2 < 0.5:
            errs.append(("sigma2", "must lie in (0, 1/2) for accel"))
        if c.algo == "pesm2" and not 0 <= c.sigma2 < 1:
            errs.append(("sigma2", "must lie in [0, 1) for pesm2"))
        for name in ("rk_schedule", "epsk_schedule"):
            try:
                sched = parse_schedule(getattr(c, name))
                if any(sched(k) < 0 for k in range(1, 11)):
                    errs.append((name, "values must be nonnegative"))
            except ValueError as exc:
                errs.append((name, str(exc)))
        try:
            parse_ek(c.ek_schedule)
        except ValueError as exc:
            errs.append(("ek_schedule", str(exc)))
        try:
            parse_stepsize_spec(c.stepsize)
        except ValueError as exc:
            errs.append(("stepsize", str(exc)))
        if c.stepsize.startswith("polyak") and c.problem == "tv":
            errs.append(("stepsize", "Polyak steps need a known lower bound; not available for tv"))
        if errs:
            raise ConfigError(errs)
        return c


def parse_stepsize_spec(spec: str):
    """Split ``const[:A]``, ``dim[:A0[:P]]``, ``polyak-exact[:G]``, ``polyak[:G[:LIMIT]]``.

    Returns ``(kind, args)``; omitted step sizes default to ``1/L`` later.
    """
    head, _, rest = str(spec).strip().partition(":")
    try:
        args = [float(a) for a in rest.split(":")] if rest else []
    except ValueError:
        raise ValueError(f"bad stepsize spec {spec!r}") from None
    limits = {"const": 1, "dim": 2, "polyak-exact": 1, "polyak": 2}
    if head not in limits or len(args) > limits[head]:
        raise ValueError(f"bad stepsize spec {spec!r}")
    if head in ("const", "dim") and args and not args[0] > 0:
        raise ValueError("step size must be positive")
    if head == "dim" and len(args) == 2 and not 0 < args[1] <= 1:
        raise ValueError("diminishing power must lie in (0, 1]")
    if head.startswith("polyak") and args and not 0 < args[0] < 2:
        raise ValueError("gamma must lie in (0, 2)")
    return head, args


def parse_ek(spec: str):
    """IPGM prox-error schedule: a schedule spec, or ``auto:Q`` for ``(C / k^Q)^2``
    with ``C`` fixed by the first prox gap."""
    spec = str(spec).strip()
    if spec.startswith("auto:"):
        q = float(spec[5:])
        if not q > 0:
            raise ValueError("q must be positive")
        return ("auto", q)
    return ("fixed", parse_schedule(spec))


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _convert(name: str, raw: str):
    typ = str(_FIELDS[name].type)
    raw = raw.strip()
    if raw.lower() in ("", "none") and "None" in typ:
        return None
    if typ.startswith("int"):
        return int(raw)
    if typ.startswith("float"):
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    return raw


def config_from_mapping(items, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply ``(key, value)`` string pairs; dashes in keys are read as underscores."""
    cfg = base or ExperimentConfig()
    errs = []
    for key, raw in items:
        name = key.strip().replace("-", "_")
        if name not in _FIELDS:
            errs.append((name, "unknown key"))
            continue
        try:
            setattr(cfg, name, _convert(name, raw))
        except ValueError as exc:
            errs.append((name, f"bad value {raw!r} ({exc})"))
    if errs:
        raise ConfigError(errs)
    return cfg


def _parser(**kw) -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"), **kw)
    p.optionxform = str
    return p


def load_config(path) -> ExperimentConfig:
    """Read one experiment; section names only group keys."""
    p = _parser(default_section="\0")  # no inheritance: [DEFAULT] is an ordinary group
    with open(path, encoding="utf-8") as fh:
        p.read_file(fh)
    return config_from_mapping([kv for sec in p.sections() for kv in p.items(sec)])


def load_batch(path) -> list[tuple[str, ExperimentConfig]]:
    """Read a batch file: one experiment per section, shared keys in ``[DEFAULT]``."""
    p = _parser()
    with open(path, encoding="utf-8") as fh:
        p.read_file(fh)
    if not p.sections():
        raise ConfigError([("sections", "batch file defines no experiments")])
    out = []
    for sec in p.sections():
        cfg = config_from_mapping(p.items(sec))
        if cfg.label is None:
            cfg.label = sec
        out.append((sec, cfg))
    return out
