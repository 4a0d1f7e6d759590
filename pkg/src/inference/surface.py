"""
Likelihood surfaces: the evaluation contract shared by exact, proxy-exact and
approximate log-likelihoods, plus finite-difference derivatives.

A surface is immutable after construction, so one instance can be evaluated
from several threads at once.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field, replace
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.config import NumericsConfig
from src.inference.errors import DomainError, EvaluationError
from src.logging_setup import get_logger


log = get_logger(__name__)

ParamPoint = NDArray[np.float64]
LoglikFn = Callable[[ParamPoint], float]
ScoreFn = Callable[[ParamPoint], NDArray[np.float64]]
InfoFn = Callable[[ParamPoint], NDArray[np.float64]]
GridLoglikFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]

_SYMMETRY_TOL = 1e-8


def as_point(theta: ArrayLike) -> ParamPoint:
    """Coerce to a 1-D float vector and insist every entry is finite."""
    point = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    if point.size == 0 or not np.all(np.isfinite(point)):
        raise ValueError(f"parameter point must be a nonempty finite vector, got {theta!r}")
    return point


class DerivativeMode(StrEnum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class Box:
    """Per-coordinate box constraints; bounds are open (strict) by default."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    closed: bool = False

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper bounds differ in length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper, strict=True)):
            raise ValueError(f"empty box {self.lower} .. {self.upper}")

    @classmethod
    def interval(cls, lo: float, hi: float, *, closed: bool = False) -> Box:
        return cls((float(lo),), (float(hi),), closed)

    @classmethod
    def unbounded(cls, dim: int) -> Box:
        return cls((-np.inf,) * dim, (np.inf,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def lower_array(self) -> NDArray[np.float64]:
        return np.asarray(self.lower, dtype=np.float64)

    def upper_array(self) -> NDArray[np.float64]:
        return np.asarray(self.upper, dtype=np.float64)

    def contains(self, theta: ArrayLike) -> bool:
        point = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        if point.shape != (self.dim,):
            return False
        lo, hi = self.lower_array(), self.upper_array()
        if self.closed:
            return bool(np.all(point >= lo) and np.all(point <= hi))
        return bool(np.all(point > lo) and np.all(point < hi))

    def margin(self, theta: ParamPoint) -> NDArray[np.float64]:
        """Distance to the nearest face, per coordinate."""
        return np.minimum(theta - self.lower_array(), self.upper_array() - theta)

    def project(self, theta: ArrayLike, rel_gap: float = 1e-12) -> ParamPoint:
        """Clip into the box, staying strictly inside open faces."""
        point = np.asarray(theta, dtype=np.float64).copy()
        lo, hi = self.lower_array(), self.upper_array()
        if self.closed:
            return np.clip(point, lo, hi)
        gap_lo = np.where(np.isfinite(lo), rel_gap * np.maximum(1.0, np.abs(lo)), 0.0)
        gap_hi = np.where(np.isfinite(hi), rel_gap * np.maximum(1.0, np.abs(hi)), 0.0)
        return np.clip(point, lo + gap_lo, hi - gap_hi)


@dataclass(frozen=True)
class EvalBundle:
    """Log-likelihood, score and observed information at one point."""

    loglik: float
    score: NDArray[np.float64]
    obs_info: NDArray[np.float64]

    def __post_init__(self) -> None:
        info = self.obs_info
        scale = max(1.0, float(np.max(np.abs(info)))) if info.size else 1.0
        if not np.allclose(info, info.T, rtol=0.0, atol=_SYMMETRY_TOL * scale):
            raise ValueError("observed information is not symmetric")


@dataclass(frozen=True)
class LikelihoodSurface:
    """
    A log-likelihood over a box-constrained parameter domain.

    Only ``loglik_fn`` is required; with ``score_fn`` the derivative mode is
    analytic (information from ``info_fn`` or central differences of the
    score), otherwise both derivatives come from :func:`fd_eval`.
    ``grid_fn`` optionally evaluates a 1-D surface on a whole grid at once.
    """

    loglik_fn: LoglikFn
    domain: Box
    score_fn: ScoreFn | None = None
    info_fn: InfoFn | None = None
    grid_fn: GridLoglikFn | None = None
    score_h_rel: float = field(default_factory=lambda: NumericsConfig.from_config().score_h_rel)
    info_h_rel: float = field(default_factory=lambda: NumericsConfig.from_config().info_h_rel)
    name: str = "surface"
    offset: float = 0.0

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def derivative_mode(self) -> DerivativeMode:
        return DerivativeMode.ANALYTIC if self.score_fn is not None else DerivativeMode.FINITE_DIFFERENCE

    def loglik(self, theta: ArrayLike) -> float:
        point = as_point(theta)
        value = float(self.loglik_fn(point)) + self.offset
        if not np.isfinite(value):
            raise EvaluationError(point, value)
        return value

    def loglik_grid(self, grid: ArrayLike) -> NDArray[np.float64]:
        """Evaluate a 1-D surface at every grid value."""
        values = np.asarray(grid, dtype=np.float64)
        if self.grid_fn is not None:
            out = np.asarray(self.grid_fn(values), dtype=np.float64) + self.offset
        else:
            out = np.array([self.loglik(v) for v in values])
        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            raise EvaluationError([float(values[bad[0]])], float(out[bad[0]]))
        return out

    def eval(self, theta: ArrayLike) -> EvalBundle:
        point = as_point(theta)
        if self.score_fn is None:
            return fd_eval(self, point)
        score = np.atleast_1d(np.asarray(self.score_fn(point), dtype=np.float64))
        if self.info_fn is not None:
            info = np.atleast_2d(np.asarray(self.info_fn(point), dtype=np.float64))
        else:
            info = _info_from_score(self, point)
        return EvalBundle(self.loglik(point), score, 0.5 * (info + info.T))

    def shifted(self, constant: float) -> LikelihoodSurface:
        """The same surface plus a theta-constant."""
        return replace(self, offset=self.offset + float(constant), name=f"{self.name}+const")


def _step(theta: ParamPoint, h_rel: float) -> NDArray[np.float64]:
    return h_rel * np.maximum(1.0, np.abs(theta))


def _check_interior(surface: LikelihoodSurface, theta: ParamPoint, h: NDArray[np.float64]) -> None:
    if theta.shape != (surface.dim,):
        raise ValueError(f"point has dimension {theta.size}, surface has {surface.dim}")
    margin = surface.domain.margin(theta)
    if np.any(margin < 2.0 * h):
        raise DomainError(
            f"theta={tuple(theta)} is within two finite-difference steps of the domain boundary",
            value=float(np.min(margin)),
        )


def _info_from_score(surface: LikelihoodSurface, theta: ParamPoint) -> NDArray[np.float64]:
    assert surface.score_fn is not None
    h = _step(theta, surface.info_h_rel)
    _check_interior(surface, theta, h)
    p = theta.size
    info = np.empty((p, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = h[j]
        up = np.atleast_1d(surface.score_fn(theta + e))
        down = np.atleast_1d(surface.score_fn(theta - e))
        info[:, j] = -(up - down) / (2.0 * h[j])
    return info


def fd_eval(
    surface: LikelihoodSurface,
    theta: ArrayLike,
    h_rel: float | None = None,
    info_h_rel: float | None = None,
) -> EvalBundle:
    """
    Score and observed information by central differences of the log-likelihood.

    ``h_rel`` scales the score step and ``info_h_rel`` the second-difference
    step (absolute step h_rel * max(1, |theta_j|)). The point must sit at
    least two steps inside the domain.
    """
    point = as_point(theta)
    h_score = _step(point, surface.score_h_rel if h_rel is None else h_rel)
    h_info = _step(point, surface.info_h_rel if info_h_rel is None else info_h_rel)
    _check_interior(surface, point, np.maximum(h_score, h_info))

    def value(x: ParamPoint) -> float:
        return surface.loglik(x)

    p = point.size
    f0 = value(point)
    score = np.empty(p)
    hess = np.empty((p, p))
    for i in range(p):
        e = np.zeros(p)
        e[i] = h_score[i]
        score[i] = (value(point + e) - value(point - e)) / (2.0 * h_score[i])

        e_info = np.zeros(p)
        e_info[i] = h_info[i]
        hess[i, i] = (value(point + e_info) - 2.0 * f0 + value(point - e_info)) / h_info[i] ** 2
    for i in range(p):
        for j in range(i + 1, p):
            ei = np.zeros(p)
            ej = np.zeros(p)
            ei[i] = h_info[i]
            ej[j] = h_info[j]
            mixed = (
                value(point + ei + ej) - value(point + ei - ej) - value(point - ei + ej) + value(point - ei - ej)
            ) / (4.0 * h_info[i] * h_info[j])
            hess[i, j] = hess[j, i] = mixed
    info = -0.5 * (hess + hess.T)
    return EvalBundle(f0, score, info)


def surface_from_function(
    fn: Callable[[float], float],
    lo: float = -np.inf,
    hi: float = np.inf,
    *,
    score: Callable[[float], float] | None = None,
    name: str = "surface",
) -> LikelihoodSurface:
    """Wrap a scalar function of a scalar parameter as a 1-D surface."""

    def loglik(theta: ParamPoint) -> float:
        return float(fn(float(theta[0])))

    score_fn: ScoreFn | None = None
    if score is not None:
        scalar_score = score

        def score_fn(theta: ParamPoint) -> NDArray[np.float64]:
            return np.array([float(scalar_score(float(theta[0])))])

    return LikelihoodSurface(loglik_fn=loglik, domain=Box.interval(lo, hi), score_fn=score_fn, name=name)
