"""Inexact proximal epsilon-subgradient methods with runtime-checkable guarantees."""

from .core import Ball, Box, DimensionError, WholeSpace, project
from .oracles import L1Norm, LeastSquares, SubgradNormTracker, TotalVariation
from .problems import ProblemInstance, make_lasso, make_toy1d, make_tv_deblur, reference_solve
from .prox import AbsoluteGap, AccelCriterion, RAbsolute, SigmaApprox, SigmaQuasi
from .solvers import (
    RelativeDiff,
    SolverConfig,
    SquaredStep,
    TargetGap,
    accel_run,
    ipgm_run,
    pesm1_run,
    pesm2_run,
    pss_run,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "AbsoluteGap",
    "AccelCriterion",
    "Ball",
    "Box",
    "DimensionError",
    "L1Norm",
    "LeastSquares",
    "ProblemInstance",
    "RAbsolute",
    "RelativeDiff",
    "SigmaApprox",
    "SigmaQuasi",
    "SolverConfig",
    "SquaredStep",
    "SubgradNormTracker",
    "TargetGap",
    "TotalVariation",
    "WholeSpace",
    "accel_run",
    "ipgm_run",
    "make_lasso",
    "make_toy1d",
    "make_tv_deblur",
    "pesm1_run",
    "pesm2_run",
    "project",
    "pss_run",
    "reference_solve",
    "run",
]
