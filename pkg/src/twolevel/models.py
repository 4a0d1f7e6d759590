"""
Data models for the two-level binomial-logit model.

Datasets are pydantic models so they validate on load and serialize to JSON
with exactly the fields below; the fit and rule types are plain frozen
dataclasses used in the numerical inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from threading import Lock
from typing import Self

import numpy as np
import orjson
from cachetools import LRUCache, cached
from numpy.polynomial.hermite import hermgauss
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator


class TwoLevelDataset(BaseModel):
    """n item counts y_i out of m trials, generated with latent SD theta0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(ge=1)
    m: int = Field(ge=1)
    y: list[int]
    theta0: float = Field(ge=0.0)
    seed: int = Field(ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_counts(self) -> Self:
        if len(self.y) != self.n:
            raise ValueError(f"expected {self.n} counts, got {len(self.y)}")
        bad = [v for v in self.y if not 0 <= v <= self.m]
        if bad:
            raise ValueError(f"counts must lie in [0, {self.m}], got {bad[0]}")
        return self

    def y_array(self) -> NDArray[np.int64]:
        return np.asarray(self.y, dtype=np.int64)

    def counts(self) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
        """Distinct y values (ascending) and how often each occurs."""
        values, counts = np.unique(self.y_array(), return_counts=True)
        return values.astype(np.int64), counts.astype(np.int64)

    def to_json(self) -> bytes:
        return orjson.dumps(self.model_dump())

    @classmethod
    def from_json(cls, data: bytes | str) -> TwoLevelDataset:
        return cls.model_validate(orjson.loads(data))


@dataclass(frozen=True)
class LaplaceFit:
    """Mode of g(b; theta, y) and the curvature there."""

    b_hat: float
    g_at_mode: float
    g2_at_mode: float


@cached(LRUCache(maxsize=16), lock=Lock())
def _hermite_rule(points: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = hermgauss(points)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes and weights for the weight function exp(-x^2)."""

    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]

    @classmethod
    def gauss_hermite(cls, points: int = 20) -> QuadratureRule:
        if points < 1:
            raise ValueError(f"quadrature needs at least one point, got {points}")
        nodes, weights = _hermite_rule(points)
        return cls(nodes, weights)

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    @property
    def log_weights(self) -> NDArray[np.float64]:
        return np.log(self.weights)
