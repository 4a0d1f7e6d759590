"""Experiment runners behind the command-line interface."""

from src.harness.io import read_csv, write_csv
from src.harness.ising_outputs import run_ising_outputs
from src.harness.models import (
    Experiment,
    ExperimentConfig,
    ReplicateFailure,
    ReplicateFailureError,
    TwoLevelReplicateResult,
)
from src.harness.selftest import CheckResult, SelftestReport, run_selftest
from src.harness.twolevel_figure import FailureBudgetError, TwoLevelSummaryRow, run_twolevel_figure


__all__ = [
    "CheckResult",
    "Experiment",
    "ExperimentConfig",
    "FailureBudgetError",
    "ReplicateFailure",
    "ReplicateFailureError",
    "SelftestReport",
    "TwoLevelReplicateResult",
    "TwoLevelSummaryRow",
    "read_csv",
    "run_ising_outputs",
    "run_selftest",
    "run_twolevel_figure",
    "write_csv",
]
