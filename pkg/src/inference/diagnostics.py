"""
Error diagnostics between an exact and an approximate likelihood surface, test
statistics and the Godambe sandwich.

delta is the L1 norm of the score error, gamma the max-column-sum norm of the
observed-information error. Suprema over a region are maxima over a declared
finite grid.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import cho_factor, cho_solve

from src.config import NumericsConfig
from src.inference.errors import (
    InconsistentMaximizersError,
    SingularInformationError,
    SingularVariabilityError,
)
from src.inference.surface import Box, EvalBundle, LikelihoodSurface, ParamPoint, as_point
from src.logging_setup import get_logger


log = get_logger(__name__)


@dataclass(frozen=True)
class RegionGrid:
    """Finite set of parameter points standing in for a region S."""

    points: NDArray[np.float64]
    step: float | None = None

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if pts.shape[0] == 0 or pts.size == 0:
            raise ValueError("region grid is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("region grid contains non-finite points")
        object.__setattr__(self, "points", pts)

    @classmethod
    def interval(cls, lo: float, hi: float, step: float | None = None) -> RegionGrid:
        """Equally spaced 1-D grid over [lo, hi], both ends included."""
        step = NumericsConfig.from_config().region_step if step is None else step
        if step <= 0 or hi < lo:
            raise ValueError(f"bad interval grid [{lo}, {hi}] step {step}")
        count = int(round((hi - lo) / step)) + 1
        values = lo + step * np.arange(count)
        values[-1] = min(values[-1], hi)
        return cls(values[:, None], step)

    @classmethod
    def ball(cls, theta0: float, radius: float, step: float | None = None, domain: Box | None = None) -> RegionGrid:
        """The 1-D ball {theta: |theta - theta0| <= radius}, clipped to ``domain``."""
        lo, hi = theta0 - radius, theta0 + radius
        grid = cls.interval(lo, hi, step)
        if domain is None:
            return grid
        keep = [p for p in grid.points if domain.contains(p)]
        if not keep:
            raise ValueError(f"ball around {theta0} of radius {radius} misses the domain")
        return cls(np.vstack(keep), grid.step)

    @classmethod
    def from_points(cls, points: Sequence[ArrayLike]) -> RegionGrid:
        return cls(np.vstack([as_point(p) for p in points]))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])


@dataclass(frozen=True)
class ErrorDiagnostics:
    points: NDArray[np.float64]
    delta: NDArray[np.float64]
    gamma: NDArray[np.float64]

    @property
    def delta_sup(self) -> float:
        return float(np.max(self.delta))

    @property
    def gamma_sup(self) -> float:
        return float(np.max(self.gamma))

    @property
    def argmax_delta(self) -> ParamPoint:
        return self.points[int(np.argmax(self.delta))]


def errors_from_bundles(exact: EvalBundle, approx: EvalBundle) -> tuple[float, float]:
    delta = float(np.sum(np.abs(approx.score - exact.score)))
    gamma = float(np.max(np.sum(np.abs(approx.obs_info - exact.obs_info), axis=0)))
    return delta, gamma


def score_error(exact: LikelihoodSurface, approx: LikelihoodSurface, theta: ArrayLike) -> tuple[float, float]:
    """(delta, gamma) at one point."""
    point = as_point(theta)
    return errors_from_bundles(exact.eval(point), approx.eval(point))


def sup_score_error(exact: LikelihoodSurface, approx: LikelihoodSurface, region: RegionGrid) -> ErrorDiagnostics:
    deltas = np.empty(len(region))
    gammas = np.empty(len(region))
    for i, point in enumerate(region.points):
        deltas[i], gammas[i] = score_error(exact, approx, point)
    diagnostics = ErrorDiagnostics(region.points, deltas, gammas)
    log.debug(
        "sup_score_error.done",
        exact=exact.name,
        approx=approx.name,
        points=len(region),
        delta_sup=diagnostics.delta_sup,
        gamma_sup=diagnostics.gamma_sup,
    )
    return diagnostics


@dataclass(frozen=True)
class TestStatistics:
    lam: float
    wald: float
    score_stat: float
    dof: int

    __test__ = False


def lr_statistic(
    surface: LikelihoodSurface,
    theta_hat_full: ArrayLike,
    theta_hat_restricted: ArrayLike,
    clamp: float | None = None,
) -> float:
    """2{l(full) - l(restricted)}, with roundoff-size negatives clamped to zero."""
    clamp = NumericsConfig.from_config().lr_clamp if clamp is None else clamp
    value = 2.0 * (surface.loglik(theta_hat_full) - surface.loglik(theta_hat_restricted))
    if value < -clamp:
        raise InconsistentMaximizersError(value)
    return max(value, 0.0)


def _cholesky(matrix: NDArray[np.float64], error: type[Exception], what: str) -> tuple[NDArray[np.float64], bool]:
    try:
        return cho_factor(matrix)
    except np.linalg.LinAlgError as e:
        raise error(f"{what} is not positive definite: {matrix.tolist()}") from e


def wald_and_score_statistics(
    surface: LikelihoodSurface,
    theta_hat: ArrayLike,
    theta_restricted: ArrayLike,
    info_at: ArrayLike | None = None,
    dof: int | None = None,
) -> TestStatistics:
    """
    Wald, score and LR statistics for a simple null theta = theta_restricted.

    The Wald and score forms share J = obs_info(info_at), info_at defaulting
    to theta_hat.
    """
    hat = as_point(theta_hat)
    restricted = as_point(theta_restricted)
    info = surface.eval(hat if info_at is None else as_point(info_at)).obs_info
    factor = _cholesky(info, SingularInformationError, "observed information")

    diff = hat - restricted
    wald = float(diff @ info @ diff)
    u = surface.eval(restricted).score
    score_stat = float(u @ cho_solve(factor, u))
    lam = lr_statistic(surface, hat, restricted)
    return TestStatistics(lam=lam, wald=max(wald, 0.0), score_stat=max(score_stat, 0.0), dof=dof or surface.dim)


@dataclass(frozen=True)
class GodambeMatrices:
    H: NDArray[np.float64]
    Ibar: NDArray[np.float64]
    G: NDArray[np.float64]


def godambe_from_bundles(bundles: Sequence[EvalBundle]) -> GodambeMatrices:
    if len(bundles) < 2:
        raise ValueError("the sandwich needs at least two replicates")
    scores = np.vstack([b.score for b in bundles])
    H = np.atleast_2d(np.cov(scores, rowvar=False, ddof=1))
    Ibar = np.mean(np.stack([b.obs_info for b in bundles]), axis=0)
    factor = _cholesky(H, SingularVariabilityError, "score variability H")
    G = Ibar @ cho_solve(factor, Ibar)
    return GodambeMatrices(H=H, Ibar=Ibar, G=0.5 * (G + G.T))


def godambe_sandwich(approx_surfaces: Sequence[LikelihoodSurface], theta: ArrayLike) -> GodambeMatrices:
    """Monte-Carlo sandwich G = Ibar H^-1 Ibar from replicate surfaces at theta."""
    point = as_point(theta)
    matrices = godambe_from_bundles([s.eval(point) for s in approx_surfaces])
    log.debug("godambe.done", replicates=len(approx_surfaces), H=matrices.H.tolist(), Ibar=matrices.Ibar.tolist())
    return matrices
