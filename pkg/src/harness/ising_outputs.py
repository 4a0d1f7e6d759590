"""Ising tables: the b_beta curve, the score-error contour and trapezium decay fits."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

from src.harness.io import write_csv
from src.harness.models import Experiment, ExperimentConfig
from src.ising.approximation import ContourCell, StabilityCell, contour_stability, delta_contour
from src.ising.lattice import BETA_C
from src.ising.spectral import DecayFit, b_beta, trapezium_decay_check
from src.logging_setup import get_logger


log = get_logger(__name__)

BBETA_FILE = "ising_bbeta.csv"
CONTOUR_FILE = "ising_contour.csv"
STABILITY_FILE = "ising_contour_stability.csv"
TRAPEZIUM_FILE = "ising_trapezium.csv"

CONTOUR_FIELDS = ["m", "k", "alpha", "beta", "log_scaled_delta"]
STABILITY_FIELDS = [
    "m",
    "k",
    "proxy_k",
    "log_scaled_delta",
    "log_scaled_delta_smaller",
    "abs_diff",
    "rel_diff",
    "truncation_bound",
    "stable",
]
TRAPEZIUM_FIELDS = ["beta", "rate", "a_beta", "b_beta", "relative_to_a", "relative_to_b"]


def write_bbeta(config: ExperimentConfig, out_dir: Path) -> list[dict[str, float]]:
    rows = []
    for beta in config.beta_values().tolist():
        value = b_beta(beta)
        rows.append({"beta": beta, "b_beta": value, "b_beta_inv": 1.0 / value, "beta_c": BETA_C})
    write_csv(out_dir / BBETA_FILE, rows, fieldnames=["beta", "b_beta", "b_beta_inv", "beta_c"])
    return rows


def _stability_row(cell: StabilityCell) -> dict[str, float | bool]:
    return {
        "m": cell.m,
        "k": cell.k,
        "proxy_k": cell.proxy_k,
        "log_scaled_delta": cell.log_scaled_delta,
        "log_scaled_delta_smaller": cell.log_scaled_delta_smaller,
        "abs_diff": cell.abs_diff,
        "rel_diff": cell.rel_diff,
        "truncation_bound": cell.truncation_bound,
        "stable": cell.stable,
    }


def write_contour(config: ExperimentConfig, out_dir: Path) -> list[ContourCell]:
    """
    log(delta_k / m) over the (m, k) grid with proxy width K; with
    ``stability`` on, the K-1 recomputation goes to a second table.
    """
    args = (config.m_list, config.k_list, config.alpha, config.beta, config.K_proxy)
    if config.stability:
        stability = contour_stability(*args, boundary=config.boundary, threads=config.threads)
        cells = [ContourCell(s.m, s.k, config.alpha, config.beta, s.log_scaled_delta) for s in stability]
        write_csv(out_dir / STABILITY_FILE, map(_stability_row, stability), fieldnames=STABILITY_FIELDS)
    else:
        cells = delta_contour(*args, boundary=config.boundary, threads=config.threads)
    write_csv(out_dir / CONTOUR_FILE, map(asdict, cells), fieldnames=CONTOUR_FIELDS)
    return cells


def write_trapezium(config: ExperimentConfig, out_dir: Path) -> list[DecayFit]:
    fits = [trapezium_decay_check(beta, config.trapezium_n) for beta in config.trapezium_betas]
    rows = [
        {
            "beta": fit.beta,
            "rate": fit.rate,
            "a_beta": fit.a_beta,
            "b_beta": fit.b_beta,
            "relative_to_a": fit.relative_to_a,
            "relative_to_b": fit.relative_to_b,
        }
        for fit in fits
    ]
    write_csv(out_dir / TRAPEZIUM_FILE, rows, fieldnames=TRAPEZIUM_FIELDS)
    return fits


_WRITERS = {
    Experiment.ISING_BBETA: write_bbeta,
    Experiment.ISING_CONTOUR: write_contour,
    Experiment.ISING_TRAPEZIUM: write_trapezium,
}


def run_ising_outputs(config: ExperimentConfig, out_dir: str | Path) -> Path:
    """Write the table for ``config.experiment`` under ``out_dir``."""
    writer = _WRITERS.get(config.experiment)
    if writer is None:
        raise ValueError(f"{config.experiment} is not an Ising experiment")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("harness.ising.start", experiment=config.experiment.value)
    writer(config, out)
    return out
