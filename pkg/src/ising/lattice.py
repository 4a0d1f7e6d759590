"""
Lattice geometry, parameters, spin configurations and sufficient statistics.

Periodic lattices always carry both wrap edges of every node, so a dimension
of 2 gives doubled edges and a dimension of 1 gives self-loops. Every
normalizing-constant routine counts edges the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Self

import numpy as np
import orjson
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, field_validator


BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))
BETA_MAX = 0.43


class Boundary(StrEnum):
    FREE = "free"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeSpec:
    r: int
    c: int
    boundary: Boundary = Boundary.FREE

    def __post_init__(self) -> None:
        if self.r < 1 or self.c < 1:
            raise ValueError(f"lattice dimensions must be positive, got {self.r}x{self.c}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def sites(self) -> int:
        return self.r * self.c

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def edge_count(self) -> int:
        if self.periodic:
            return 2 * self.sites
        return self.r * (self.c - 1) + self.c * (self.r - 1)

    def with_rows(self, rows: int) -> LatticeSpec:
        return LatticeSpec(rows, self.c, self.boundary)

    def edges(self) -> NDArray[np.int64]:
        """(E, 2) array of row-major site index pairs, right then down neighbour of each node."""
        idx = np.arange(self.sites).reshape(self.r, self.c)
        if self.periodic:
            right = np.stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()], axis=1)
            down = np.stack([idx.ravel(), np.roll(idx, -1, axis=0).ravel()], axis=1)
        else:
            right = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
            down = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
        return np.concatenate([right, down]).astype(np.int64)

    def __str__(self) -> str:
        return f"{self.r}x{self.c}-{self.boundary.value}"


@dataclass(frozen=True)
class IsingParams:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError(f"parameters must be finite, got alpha={self.alpha}, beta={self.beta}")
        if self.beta < 0.0:
            raise ValueError(f"interaction beta must be non-negative, got {self.beta}")

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.alpha, self.beta])


class SpinConfig(BaseModel):
    """Row-major +-1 spins; serializes as a plain JSON integer array."""

    model_config = ConfigDict(frozen=True)

    spins: list[int]

    @field_validator("spins")
    @classmethod
    def _plus_minus_one(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("configuration is empty")
        if any(s not in (-1, 1) for s in v):
            raise ValueError("spins must be -1 or +1")
        return v

    @classmethod
    def from_array(cls, spins: NDArray[np.integer]) -> Self:
        return cls(spins=[int(s) for s in np.asarray(spins).ravel()])

    @classmethod
    def from_json(cls, data: bytes | str) -> Self:
        return cls(spins=orjson.loads(data))

    def to_json(self) -> bytes:
        return orjson.dumps(self.spins)

    def array(self) -> NDArray[np.int64]:
        return np.asarray(self.spins, dtype=np.int64)


@dataclass(frozen=True)
class SuffStats:
    v0: int
    v1: int


def suff_stats(config: SpinConfig, lattice: LatticeSpec) -> SuffStats:
    """Magnetization V0 and edge agreement V1 under the lattice's edge convention."""
    spins = config.array()
    if spins.size != lattice.sites:
        raise ValueError(f"configuration has {spins.size} spins, lattice {lattice} has {lattice.sites} sites")
    e = lattice.edges()
    return SuffStats(v0=int(spins.sum()), v1=int(np.sum(spins[e[:, 0]] * spins[e[:, 1]])))
