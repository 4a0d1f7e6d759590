"""
Replicated comparison of exact (adaptive quadrature) and Laplace likelihood
inference in the two-level model, one summary row per (n, a) cell.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import orjson

from src.harness.io import write_csv
from src.harness.models import ExperimentConfig, ReplicateFailure, ReplicateFailureError, TwoLevelReplicateResult
from src.inference.diagnostics import score_error
from src.inference.errors import NumericalError
from src.inference.optimize import lr_confidence_interval, maximize
from src.inference.posterior import grid_posterior, inverse_prior, tv_distance
from src.inference.surface import DerivativeMode
from src.logging_setup import bind_contextvars, clear_contextvars, get_logger
from src.twolevel.likelihood import Method, dataset_surface
from src.twolevel.simulate import mn_schedule, simulate_two_level
from src.utils import stream_entropy


log = get_logger(__name__)

SUMMARY_FILE = "twolevel_summary.csv"
FAILURES_FILE = "twolevel_failures.jsonl"
EXPERIMENT_TAG = "twolevel"


class FailureBudgetError(NumericalError):
    """Too many replicates of one cell failed."""

    def __init__(self, n: int, a: float, failures: int, replicates: int, fraction: float) -> None:
        self.n = n
        self.a = a
        self.failures = failures
        self.replicates = replicates
        super().__init__(
            f"{failures}/{replicates} replicates failed for n={n}, a={a} (allowed fraction {fraction:g})"
        )


@dataclass(frozen=True)
class TwoLevelSummaryRow:
    n: int
    a: float
    m: int
    rmse_exact: float
    rmse_laplace: float
    rmse_ratio: float
    cov_exact: float
    cov_laplace: float
    mean_tvd: float
    rhat: float
    scaled_delta: float


SUMMARY_FIELDS = list(TwoLevelSummaryRow.__dataclass_fields__)


def fit_replicate(
    config: ExperimentConfig, cell: int, replicate: int, n: int, m: int
) -> TwoLevelReplicateResult:
    """
    Simulate one dataset and fit it with both likelihoods.

    The data stream is keyed by (seed, tag, cell, replicate) so the result
    does not depend on which worker runs it.
    """
    dataset = simulate_two_level(
        n, m, config.theta0, config.seed, stream=stream_entropy(EXPERIMENT_TAG, cell, replicate)
    )
    exact = dataset_surface(dataset, Method.QUADRATURE, derivative_mode=DerivativeMode.ANALYTIC)
    laplace = dataset_surface(dataset, Method.LAPLACE, derivative_mode=DerivativeMode.ANALYTIC)

    fit_exact = maximize(exact, [config.theta0])
    fit_laplace = maximize(laplace, [config.theta0])
    if not (fit_exact.converged and fit_laplace.converged):
        raise NumericalError("maximizer did not converge")
    theta_hat = float(fit_exact.theta[0])
    theta_tilde = float(fit_laplace.theta[0])

    ci_exact = lr_confidence_interval(exact, fit_exact.theta, config.level)
    ci_laplace = lr_confidence_interval(laplace, fit_laplace.theta, config.level)

    thetas = config.posterior_thetas()
    tvd = tv_distance(
        grid_posterior(exact, inverse_prior, thetas),
        grid_posterior(laplace, inverse_prior, thetas),
    )
    delta, _ = score_error(exact, laplace, [config.theta0])

    return TwoLevelReplicateResult(
        replicate=replicate,
        theta_hat_exact=theta_hat,
        theta_hat_laplace=theta_tilde,
        covered_exact=ci_exact.covers(config.theta0),
        covered_laplace=ci_laplace.covers(config.theta0),
        tvd=tvd,
        j_norm_at_hat=abs(float(fit_exact.bundle.obs_info[0, 0])),
        delta_at_theta0=delta,
    )


def _run_one(config: ExperimentConfig, cell: int, replicate: int, n: int, m: int) -> TwoLevelReplicateResult:
    bind_contextvars(experiment=EXPERIMENT_TAG, cell=cell, replicate=replicate)
    try:
        return fit_replicate(config, cell, replicate, n, m)
    except (NumericalError, ValueError) as e:
        raise ReplicateFailureError(cell, replicate, e) from e
    finally:
        clear_contextvars()


def _attempt(
    config: ExperimentConfig, cell: int, replicate: int, n: int, m: int
) -> TwoLevelReplicateResult | ReplicateFailureError:
    try:
        return _run_one(config, cell, replicate, n, m)
    except ReplicateFailureError as e:
        log.warning("harness.replicate.failed", n=n, m=m, cell=cell, replicate=replicate, error=str(e.cause))
        return e


def summarize(
    n: int, a: float, m: int, theta0: float, results: Sequence[TwoLevelReplicateResult]
) -> TwoLevelSummaryRow:
    """Aggregate replicate results in replicate order."""
    exact = np.array([r.theta_hat_exact for r in results])
    approx = np.array([r.theta_hat_laplace for r in results])
    rmse_exact = math.sqrt(float(np.mean((exact - theta0) ** 2)))
    rmse_laplace = math.sqrt(float(np.mean((approx - theta0) ** 2)))
    rhat = float(np.mean([r.j_norm_at_hat for r in results]))
    mean_delta = float(np.mean([r.delta_at_theta0 for r in results]))
    return TwoLevelSummaryRow(
        n=n,
        a=a,
        m=m,
        rmse_exact=rmse_exact,
        rmse_laplace=rmse_laplace,
        rmse_ratio=rmse_laplace / rmse_exact if rmse_exact > 0.0 else math.inf,
        cov_exact=float(np.mean([r.covered_exact for r in results])),
        cov_laplace=float(np.mean([r.covered_laplace for r in results])),
        mean_tvd=float(np.mean([r.tvd for r in results])),
        rhat=rhat,
        scaled_delta=mean_delta / math.sqrt(rhat) if rhat > 0.0 else math.inf,
    )


def run_twolevel_figure(config: ExperimentConfig, out_dir: str | Path) -> list[TwoLevelSummaryRow]:
    """
    Run every (n, a) cell, write ``twolevel_summary.csv`` and a JSONL sidecar
    listing excluded replicates.

    Raises FailureBudgetError when a cell loses more than ``failure_fraction``
    of its replicates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[TwoLevelSummaryRow] = []
    failures: list[ReplicateFailure] = []
    cells = [(n, a) for n in config.n_list for a in config.a_list]

    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        for cell, (n, a) in enumerate(cells):
            m = mn_schedule(n, a, literal=config.schedule_literal)
            log.info("harness.cell.start", n=n, a=a, m=m, replicates=config.replicates)
            outcomes = list(
                pool.map(lambda r, n=n, m=m, cell=cell: _attempt(config, cell, r, n, m), range(config.replicates))
            )
            good = [o for o in outcomes if isinstance(o, TwoLevelReplicateResult)]
            bad = [o for o in outcomes if isinstance(o, ReplicateFailureError)]
            failures.extend(
                ReplicateFailure(
                    n=n, a=a, m=m, replicate=e.replicate, error=type(e.cause).__name__, message=str(e.cause)
                )
                for e in bad
            )
            if len(bad) > config.failure_fraction * config.replicates or not good:
                _write_failures(out, failures)
                raise FailureBudgetError(n, a, len(bad), config.replicates, config.failure_fraction)

            row = summarize(n, a, m, config.theta0, good)
            rows.append(row)
            log.info("harness.cell.done", failures=len(bad), **asdict(row))

    write_csv(out / SUMMARY_FILE, [asdict(r) for r in rows], fieldnames=SUMMARY_FIELDS)
    _write_failures(out, failures)
    return rows


def _write_failures(out: Path, failures: Sequence[ReplicateFailure]) -> None:
    with (out / FAILURES_FILE).open("wb") as f:
        for failure in failures:
            f.write(orjson.dumps(failure.model_dump()) + b"\n")
