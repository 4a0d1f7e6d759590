"""
Pydantic models for experiment configuration and per-replicate results.

Experiment configs are JSON files (YAML also parses, being a superset) whose
keys are exactly the ExperimentConfig fields. Anything the file leaves out is
taken from the ``harness`` section of config/config.yaml, then from the
defaults below; CLI flags override both.
"""

from __future__ import annotations

import math
import os
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.config import ConfigurationError, load_config, read_config_file
from src.inference.errors import NumericalError
from src.ising.lattice import Boundary


class Experiment(StrEnum):
    TWOLEVEL_FIGURE = "twolevel-figure"
    ISING_BBETA = "ising-bbeta"
    ISING_CONTOUR = "ising-contour"
    ISING_TRAPEZIUM = "ising-trapezium"


class ReplicateFailureError(NumericalError):
    """One replicate of a simulation cell could not be fitted."""

    def __init__(self, cell: int, replicate: int, cause: Exception) -> None:
        self.cell = cell
        self.replicate = replicate
        self.cause = cause
        super().__init__(f"replicate {replicate} of cell {cell} failed: {type(cause).__name__}: {cause}")


def _grid(lo: float, hi: float, step: float) -> NDArray[np.float64]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: Experiment = Experiment.TWOLEVEL_FIGURE
    seed: int = Field(default=1, ge=0, lt=2**64)
    replicates: int = Field(default=500, ge=1)
    threads: int = Field(default=1, ge=1)

    # two-level
    n_list: list[int] = Field(default_factory=lambda: [1000, 2154, 4642, 10000])
    a_list: list[float] = Field(default_factory=lambda: [0.2, 0.25, 0.3])
    theta0: float = Field(default=0.5, gt=0.0)
    level: float = 0.9
    posterior_grid: tuple[float, float, float] = (0.05, 3.0, 0.005)
    failure_fraction: float = Field(default=0.02, ge=0.0, le=1.0)
    schedule_literal: bool = False

    # ising
    m_list: list[int] = Field(default_factory=lambda: [20, 40, 60, 80, 100, 120])
    k_list: list[int] = Field(default_factory=lambda: list(range(2, 11)))
    alpha: float = 0.1
    beta: float = 0.3
    K_proxy: int = Field(default=12, ge=3)
    boundary: Boundary = Boundary.FREE
    stability: bool = True
    beta_grid: tuple[float, float, float] = (0.05, 0.43, 0.005)
    trapezium_betas: list[float] = Field(default_factory=lambda: [0.2, 0.3])
    trapezium_n: list[int] = Field(default_factory=lambda: list(range(8, 21)))

    @field_validator("n_list", "a_list", "m_list", "k_list", "trapezium_betas", "trapezium_n")
    @classmethod
    def _nonempty(cls, value: list) -> list:
        if not value:
            raise ValueError("list must be nonempty")
        return value

    @field_validator("level")
    @classmethod
    def _check_level(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {value}")
        return value

    @field_validator("posterior_grid", "beta_grid")
    @classmethod
    def _check_grid(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        lo, hi, step = value
        if not (lo < hi and step > 0.0):
            raise ValueError(f"grid needs lo < hi and step > 0, got {value}")
        return value

    @model_validator(mode="after")
    def _check_twolevel(self) -> Self:
        if self.experiment is Experiment.TWOLEVEL_FIGURE:
            if min(self.n_list) < 1000:
                raise ValueError("n_list entries must be >= 1000")
            if any(not 0.0 < a < 1.0 for a in self.a_list):
                raise ValueError("a_list entries must lie in (0, 1)")
            if self.posterior_grid[0] <= 0.0:
                raise ValueError("posterior grid must stay above theta = 0")
        return self

    def posterior_thetas(self) -> NDArray[np.float64]:
        return _grid(*self.posterior_grid)

    def beta_values(self) -> NDArray[np.float64]:
        return _grid(*self.beta_grid)

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides: Any) -> ExperimentConfig:
        """
        Merge config.yaml ``harness`` defaults, the file at ``path`` and the
        non-None ``overrides`` (in that order), then validate.

        ``threads`` falls back to $APRXLIK_THREADS before the yaml default.
        """
        data: dict[str, Any] = dict(load_config().get("harness", {}) or {})
        env_threads = os.getenv("APRXLIK_THREADS")
        if env_threads:
            data["threads"] = env_threads
        if path is not None:
            data.update(read_config_file(path))
        data.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            source = path if path is not None else "defaults"
            raise ConfigurationError(f"Invalid experiment configuration ({source}): {e}") from e


class TwoLevelReplicateResult(BaseModel):
    """One simulated dataset fitted with both likelihoods."""

    model_config = ConfigDict(frozen=True)

    replicate: int
    theta_hat_exact: float = Field(gt=0.0)
    theta_hat_laplace: float = Field(gt=0.0)
    covered_exact: bool
    covered_laplace: bool
    tvd: float = Field(ge=0.0, le=1.0)
    j_norm_at_hat: float
    delta_at_theta0: float = Field(ge=0.0)


class ReplicateFailure(BaseModel):
    """Sidecar record for an excluded replicate."""

    n: int
    a: float
    m: int
    replicate: int
    error: str
    message: str
