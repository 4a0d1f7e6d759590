"""Grid posteriors for one-dimensional parameters, TV distance and the posterior mode."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import trapezoid

from src.inference.errors import DegeneratePosteriorError, GridMismatchError
from src.inference.optimize import MaximizeResult, maximize
from src.inference.surface import LikelihoodSurface, ParamPoint
from src.logging_setup import get_logger


log = get_logger(__name__)

LogPrior = Callable[[float], float]


def flat_prior(theta: float) -> float:
    return 0.0


def inverse_prior(theta: float) -> float:
    """log pi(theta) for pi(theta) proportional to 1/theta."""
    return -float(np.log(theta))


@dataclass(frozen=True)
class PosteriorGrid:
    grid: NDArray[np.float64]
    log_density_unnorm: NDArray[np.float64]
    density: NDArray[np.float64]

    def mass(self) -> float:
        return float(trapezoid(self.density, self.grid))

    def mean(self) -> float:
        return float(trapezoid(self.grid * self.density, self.grid))

    def same_grid(self, other: PosteriorGrid) -> bool:
        return self.grid.shape == other.grid.shape and bool(np.array_equal(self.grid, other.grid))


def _check_grid(grid: NDArray[np.float64]) -> None:
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("posterior grid must be a 1-D vector with at least two points")
    if not np.all(np.diff(grid) > 0):
        raise ValueError("posterior grid must be strictly increasing")


def grid_posterior(surface: LikelihoodSurface, log_prior: LogPrior, grid: ArrayLike) -> PosteriorGrid:
    """
    Posterior density on a grid, normalized by the trapezium rule.

    The maximum of log-likelihood plus log-prior is subtracted before
    exponentiating, so constant shifts of the surface leave the result unchanged.
    """
    values = np.asarray(grid, dtype=np.float64)
    _check_grid(values)
    if surface.dim != 1:
        raise ValueError("grid posteriors are one-dimensional")
    outside = [float(v) for v in values if not surface.domain.contains([v])]
    if outside:
        raise ValueError(f"grid points outside the surface domain, first {outside[0]}")

    prior = np.array([log_prior(float(v)) for v in values])
    if not np.all(np.isfinite(prior)):
        raise ValueError("log prior is not finite on the whole grid")
    log_unnorm = surface.loglik_grid(values) + prior
    density = np.exp(log_unnorm - np.max(log_unnorm))
    total = float(trapezoid(density, values))
    if not np.isfinite(total) or total <= 0.0:
        raise DegeneratePosteriorError(f"posterior on {values.size} grid points has no mass")
    return PosteriorGrid(grid=values, log_density_unnorm=log_unnorm, density=density / total)


def tv_distance(p: PosteriorGrid, q: PosteriorGrid) -> float:
    """Half the trapezium-rule L1 distance between two posteriors on one grid."""
    if not p.same_grid(q):
        raise GridMismatchError(f"grids differ: {p.grid.size} vs {q.grid.size} points")
    value = 0.5 * float(trapezoid(np.abs(p.density - q.density), p.grid))
    return min(max(value, 0.0), 1.0)


def penalized_surface(surface: LikelihoodSurface, log_prior: LogPrior) -> LikelihoodSurface:
    """l(theta) + log pi(theta); its maximizer is the posterior mode."""
    base = surface

    def loglik(theta: ParamPoint) -> float:
        return base.loglik(theta) + log_prior(float(theta[0]))

    return LikelihoodSurface(
        loglik_fn=loglik,
        domain=surface.domain,
        score_h_rel=surface.score_h_rel,
        info_h_rel=surface.info_h_rel,
        name=f"{surface.name}+prior",
    )


def posterior_mode(surface: LikelihoodSurface, log_prior: LogPrior, theta_init: ArrayLike) -> MaximizeResult:
    if surface.dim != 1:
        raise ValueError("posterior_mode supports one-dimensional surfaces")
    result = maximize(penalized_surface(surface, log_prior), theta_init)
    log.debug("posterior_mode.done", surface=surface.name, mode=result.theta.tolist(), converged=result.converged)
    return result
