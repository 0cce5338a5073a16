"""Experiment harness: configuration, runs, telemetry and the ``proxeps`` CLI."""

from .config import ConfigError, ExperimentConfig, load_batch, load_config
from .runner import (
    CSV_COLUMNS,
    ExperimentResult,
    SummaryRow,
    compare_table,
    numeric_columns,
    records_csv,
    run_batch,
    run_experiment,
)
from .verify import SUITES, run_suite

__all__ = [
    "CSV_COLUMNS",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentResult",
    "SUITES",
    "SummaryRow",
    "compare_table",
    "load_batch",
    "load_config",
    "numeric_columns",
    "records_csv",
    "run_batch",
    "run_experiment",
    "run_suite",
]
