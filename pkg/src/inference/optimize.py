"""Maximization, chi-squared quantiles and likelihood-ratio interval inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import bisect
from scipy.special import gammainc

from src.config import NumericsConfig
from src.inference.errors import EvaluationError, IntervalError, NumericalError
from src.inference.surface import EvalBundle, LikelihoodSurface, ParamPoint, as_point
from src.logging_setup import get_logger


log = get_logger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_HALVINGS = 60


class MaximizeResult(NamedTuple):
    theta: ParamPoint
    bundle: EvalBundle
    converged: bool


def _fd_margin(surface: LikelihoodSurface, theta: ParamPoint) -> np.ndarray:
    return 3.0 * max(surface.info_h_rel, surface.score_h_rel) * np.maximum(1.0, np.abs(theta))


def interior_project(surface: LikelihoodSurface, theta: ArrayLike) -> ParamPoint:
    """Clip into the domain, keeping room for a finite-difference stencil."""
    point = np.asarray(theta, dtype=np.float64)
    lo = surface.domain.lower_array()
    hi = surface.domain.upper_array()
    margin_lo = np.where(np.isfinite(lo), _fd_margin(surface, lo), 0.0)
    margin_hi = np.where(np.isfinite(hi), _fd_margin(surface, hi), 0.0)
    return np.clip(point, lo + margin_lo, hi - margin_hi)


def _safe_loglik(surface: LikelihoodSurface, theta: ParamPoint) -> float:
    try:
        return surface.loglik(theta)
    except EvaluationError:
        return -math.inf


def _golden_coordinate(surface: LikelihoodSurface, theta: ParamPoint, j: int, iterations: int = 120) -> ParamPoint:
    """Golden-section search along coordinate j inside the domain box."""
    lo_box = interior_project(surface, np.full_like(theta, -np.inf))[j]
    hi_box = interior_project(surface, np.full_like(theta, np.inf))[j]
    width = 10.0 * max(1.0, abs(float(theta[j])))
    a = max(float(lo_box), float(theta[j]) - width)
    b = min(float(hi_box), float(theta[j]) + width)

    def f(x: float) -> float:
        point = theta.copy()
        point[j] = x
        return _safe_loglik(surface, point)

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        if b - a <= 1e-13 * max(1.0, abs(a)):
            break
    out = theta.copy()
    out[j] = 0.5 * (a + b)
    return out


def maximize(
    surface: LikelihoodSurface,
    theta_init: ArrayLike,
    tol: float | None = None,
    max_iter: int | None = None,
) -> MaximizeResult:
    """
    Projected Newton ascent with backtracking halving.

    Falls back to golden-section on the coordinate with the largest score
    component whenever the observed information is not positive definite or
    halving fails to increase the log-likelihood. Converged when the L1 score
    is below tol * max(1, |loglik|) or successive iterates move less than tol.
    The best point seen is returned, with ``converged=False`` at the cap.
    """
    numerics = NumericsConfig.from_config()
    tol = numerics.tol if tol is None else tol
    max_iter = numerics.max_iter if max_iter is None else max_iter

    x = interior_project(surface, as_point(theta_init))
    bundle = surface.eval(x)
    for iteration in range(max_iter):
        if np.sum(np.abs(bundle.score)) <= tol * max(1.0, abs(bundle.loglik)):
            log.debug("maximize.converged", iterations=iteration, criterion="score", theta=x.tolist())
            return MaximizeResult(x, bundle, True)

        x_new = None
        try:
            np.linalg.cholesky(bundle.obs_info)
            step = np.linalg.solve(bundle.obs_info, bundle.score)
        except np.linalg.LinAlgError:
            step = None
        if step is not None and np.all(np.isfinite(step)):
            t = 1.0
            for _ in range(_MAX_HALVINGS):
                candidate = interior_project(surface, x + t * step)
                if _safe_loglik(surface, candidate) >= bundle.loglik:
                    x_new = candidate
                    break
                t *= 0.5
        if x_new is None:
            j = int(np.argmax(np.abs(bundle.score)))
            log.debug("maximize.golden_fallback", iteration=iteration, coordinate=j)
            x_new = _golden_coordinate(surface, x, j)
            if _safe_loglik(surface, x_new) < bundle.loglik:
                x_new = x

        moved = float(np.max(np.abs(x_new - x)))
        new_bundle = surface.eval(x_new) if moved > 0.0 else bundle
        if new_bundle.loglik >= bundle.loglik:
            x, bundle = x_new, new_bundle
        if moved <= tol * max(1.0, float(np.max(np.abs(x)))):
            log.debug("maximize.converged", iterations=iteration + 1, criterion="step", theta=x.tolist())
            return MaximizeResult(x, bundle, True)

    log.warning("maximize.not_converged", max_iter=max_iter, theta=x.tolist(), score=bundle.score.tolist())
    return MaximizeResult(x, bundle, False)


def chi2_cdf(q: float, dof: int) -> float:
    if q <= 0.0:
        return 0.0
    return float(gammainc(0.5 * dof, 0.5 * q))


def chi2_quantile(dof: int, level: float) -> float:
    """Quantile of the chi-squared distribution by bisection on its CDF."""
    if dof < 1:
        raise ValueError(f"dof must be a positive integer, got {dof}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    hi = max(1.0, float(dof))
    while chi2_cdf(hi, dof) < level:
        hi *= 2.0
    return float(
        bisect(lambda q: chi2_cdf(q, dof) - level, 0.0, hi, xtol=1e-15, rtol=8.9e-16, maxiter=2000)
    )


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    lo_truncated: bool = False
    hi_truncated: bool = False

    @property
    def truncated(self) -> bool:
        return self.lo_truncated or self.hi_truncated

    def covers(self, theta: float) -> bool:
        return self.lo <= theta <= self.hi


def _endpoint(
    surface: LikelihoodSurface,
    theta_hat: float,
    f_hat: float,
    target: float,
    direction: float,
    step0: float,
) -> tuple[float, bool]:
    box_lo = surface.domain.project([-np.inf])[0]
    box_hi = surface.domain.project([np.inf])[0]
    edge = box_hi if direction > 0 else box_lo
    slack = max(1e-6, 1e-9 * abs(f_hat))

    def f(x: float) -> float:
        return surface.loglik([x])

    inner = theta_hat
    step = step0
    while True:
        outer = theta_hat + direction * step
        at_edge = (outer - edge) * direction >= 0.0
        if at_edge:
            outer = float(edge)
        value = f(outer)
        if value > f_hat + slack:
            raise IntervalError(
                f"log-likelihood rises from {f_hat:.6g} to {value:.6g} at theta={outer:.6g}; "
                "theta_hat is not the maximizer"
            )
        if value <= target:
            break
        if at_edge:
            log.warning("lr_interval.truncated", edge=outer, direction=direction)
            return outer, True
        inner = outer
        step *= 2.0

    root = bisect(
        lambda x: f(x) - target,
        min(inner, outer),
        max(inner, outer),
        xtol=1e-13 * max(1.0, abs(theta_hat)),
        maxiter=500,
    )
    return float(root), False


def lr_confidence_interval(surface: LikelihoodSurface, theta_hat: ArrayLike, level: float) -> ConfidenceInterval:
    """
    Invert the likelihood-ratio statistic: all theta with
    2{l(theta_hat) - l(theta)} <= chi2_1(level), for a 1-D surface.
    """
    if surface.dim != 1:
        raise ValueError("lr_confidence_interval needs a one-dimensional surface")
    point = as_point(theta_hat)
    centre = float(point[0])
    q = chi2_quantile(1, level)
    f_hat = surface.loglik(point)
    if q <= 0.0:
        return ConfidenceInterval(centre, centre, level)
    target = f_hat - 0.5 * q

    try:
        curvature = float(surface.eval(interior_project(surface, point)).obs_info[0, 0])
    except NumericalError:
        curvature = 0.0
    step0 = math.sqrt(q / curvature) if curvature > 0.0 else 0.1 * max(1.0, abs(centre))
    step0 = max(step0, 1e-12 * max(1.0, abs(centre)))

    lo, lo_trunc = _endpoint(surface, centre, f_hat, target, -1.0, step0)
    hi, hi_trunc = _endpoint(surface, centre, f_hat, target, 1.0, step0)
    return ConfidenceInterval(lo, hi, level, lo_trunc, hi_trunc)
