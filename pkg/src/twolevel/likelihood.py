"""
Per-item and dataset log-likelihoods for the two-level binomial-logit model.

For one item with y successes out of m trials and latent b ~ N(0, theta^2),

    g(b) = -log C(m, y) - y b + m log(1 + e^b) + b^2 / (2 theta^2) + log theta + log sqrt(2 pi)

so that L(theta) = integral of exp(-g(b)) db. The Laplace approximation
expands g about its mode; the adaptive Gauss-Hermite rule recentres and
rescales the nodes at the same mode and serves as the exact likelihood.

The array functions broadcast over y and theta, so a whole dataset (or a
dataset times a theta grid) is one Newton iteration.
"""

from __future__ import annotations

import math
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import expit, gammaln, logit, logsumexp

from src.config import load_config
from src.inference.errors import DomainError, NumericalError
from src.inference.surface import Box, DerivativeMode, LikelihoodSurface, ParamPoint
from src.logging_setup import get_logger
from src.twolevel.models import LaplaceFit, QuadratureRule, TwoLevelDataset


log = get_logger(__name__)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)
_EPS = np.finfo(np.float64).eps

FloatArray = NDArray[np.float64]


class ModeFailureError(NumericalError):
    """Newton iteration for the mode of g did not converge."""

    def __init__(self, y: float, m: int, theta: float, steps: int) -> None:
        self.y = y
        self.m = m
        self.theta = theta
        self.steps = steps
        super().__init__(f"mode of g not found after {steps} Newton steps (y={y:g}, m={m}, theta={theta:.6g})")


class Method(StrEnum):
    LAPLACE = "laplace"
    QUADRATURE = "quadrature"


def _section() -> dict:
    return load_config().get("twolevel", {}) or {}


def default_domain() -> Box:
    lo, hi = _section().get("domain", [1e-4, 10.0])
    return Box.interval(float(lo), float(hi))


def default_rule() -> QuadratureRule:
    return QuadratureRule.gauss_hermite(int(_section().get("quadrature_points", 20)))


def log_binom(y: ArrayLike, m: int) -> FloatArray:
    y = np.asarray(y, dtype=np.float64)
    return gammaln(m + 1.0) - gammaln(y + 1.0) - gammaln(m - y + 1.0)


def g_value(b: ArrayLike, y: ArrayLike, m: int, theta: ArrayLike) -> FloatArray:
    b = np.asarray(b, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    return (
        -log_binom(y, m)
        - np.asarray(y, dtype=np.float64) * b
        + m * np.logaddexp(0.0, b)
        + b * b / (2.0 * theta * theta)
        + np.log(theta)
        + LOG_SQRT_2PI
    )


def g_prime(b: ArrayLike, y: ArrayLike, m: int, theta: ArrayLike) -> FloatArray:
    b = np.asarray(b, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    return -np.asarray(y, dtype=np.float64) + m * expit(b) + b / (theta * theta)


def g_second(b: ArrayLike, m: int, theta: ArrayLike) -> FloatArray:
    p = expit(np.asarray(b, dtype=np.float64))
    theta = np.asarray(theta, dtype=np.float64)
    return m * p * (1.0 - p) + 1.0 / (theta * theta)


def _check_inputs(y: FloatArray, m: int, theta: FloatArray) -> None:
    if np.any(~np.isfinite(theta)) or np.any(theta <= 0.0):
        bad = float(theta[~(np.isfinite(theta) & (theta > 0.0))].ravel()[0])
        raise DomainError(f"theta must be positive and finite, got {bad}", value=bad)
    if np.any(y < 0) or np.any(y > m):
        raise ValueError(f"counts must lie in [0, {m}]")


def laplace_modes(
    y: ArrayLike, m: int, theta: ArrayLike, max_iter: int | None = None
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """
    Broadcast (b_hat, g(b_hat), g''(b_hat)) by damped Newton iteration started
    at logit((y + 1/2)/(m + 1)).

    Each step is halved until |g'| decreases; an entry stops once |g'| is at
    roundoff level or its step no longer moves b.
    """
    y_arr, theta_arr = np.broadcast_arrays(np.asarray(y, dtype=np.float64), np.asarray(theta, dtype=np.float64))
    _check_inputs(y_arr, m, theta_arr)
    max_iter = int(_section().get("mode_max_iter", 100)) if max_iter is None else max_iter

    b = logit((y_arr + 0.5) / (m + 1.0))
    tol = 1e-12 * max(1.0, m)
    active = np.ones(b.shape, dtype=bool)
    for _ in range(max_iter):
        gp = g_prime(b, y_arr, m, theta_arr)
        active &= np.abs(gp) > tol * np.maximum(1.0, np.abs(b))
        if not active.any():
            break
        step = np.where(active, gp / g_second(b, m, theta_arr), 0.0)
        t = np.ones(b.shape)
        for _ in range(34):
            worse = active & (np.abs(g_prime(b - t * step, y_arr, m, theta_arr)) >= np.abs(gp))
            if not worse.any():
                break
            t = np.where(worse, 0.5 * t, t)
        new_b = b - t * step
        active &= np.abs(new_b - b) > 4.0 * _EPS * np.maximum(1.0, np.abs(b))
        b = new_b
    else:
        if active.any():
            i = np.flatnonzero(active.ravel())[0]
            raise ModeFailureError(float(y_arr.ravel()[i]), m, float(theta_arr.ravel()[i]), max_iter)

    return b, g_value(b, y_arr, m, theta_arr), g_second(b, m, theta_arr)


def laplace_mode(y: int, m: int, theta: float, max_iter: int | None = None) -> LaplaceFit:
    b, g, g2 = laplace_modes(y, m, theta, max_iter)
    return LaplaceFit(b_hat=float(b), g_at_mode=float(g), g2_at_mode=float(g2))


def loglik_laplace(y: ArrayLike, m: int, theta: ArrayLike) -> FloatArray:
    _, g, g2 = laplace_modes(y, m, theta)
    return -g + LOG_SQRT_2PI - 0.5 * np.log(g2)


def _adaptive_nodes(
    b_hat: FloatArray, g2: FloatArray, rule: QuadratureRule
) -> tuple[FloatArray, FloatArray]:
    sigma = g2**-0.5
    return sigma, b_hat[..., None] + SQRT2 * sigma[..., None] * rule.nodes


def _node_log_terms(
    b: FloatArray, y: FloatArray, m: int, theta: FloatArray, rule: QuadratureRule
) -> FloatArray:
    return rule.log_weights - g_value(b, y[..., None], m, theta[..., None]) + rule.nodes**2


def loglik_quadrature(y: ArrayLike, m: int, theta: ArrayLike, rule: QuadratureRule | None = None) -> FloatArray:
    """log of the adaptive Gauss-Hermite estimate, max-subtracted over nodes."""
    rule = default_rule() if rule is None else rule
    y_arr, theta_arr = np.broadcast_arrays(np.asarray(y, dtype=np.float64), np.asarray(theta, dtype=np.float64))
    b_hat, _, g2 = laplace_modes(y_arr, m, theta_arr)
    sigma, b = _adaptive_nodes(b_hat, g2, rule)
    return logsumexp(_node_log_terms(b, y_arr, m, theta_arr, rule), axis=-1) + np.log(SQRT2 * sigma)


def _mode_derivatives(b_hat: FloatArray, g2: FloatArray, m: int, theta: FloatArray) -> tuple[FloatArray, FloatArray]:
    """(d b_hat / d theta, d g2 / d theta) along the mode."""
    p = expit(b_hat)
    db = 2.0 * b_hat / theta**3 / g2
    dg2 = m * p * (1.0 - p) * (1.0 - 2.0 * p) * db - 2.0 / theta**3
    return db, dg2


def score_laplace(y: ArrayLike, m: int, theta: ArrayLike) -> FloatArray:
    y_arr, theta_arr = np.broadcast_arrays(np.asarray(y, dtype=np.float64), np.asarray(theta, dtype=np.float64))
    b_hat, _, g2 = laplace_modes(y_arr, m, theta_arr)
    _, dg2 = _mode_derivatives(b_hat, g2, m, theta_arr)
    return b_hat**2 / theta_arr**3 - 1.0 / theta_arr - 0.5 * dg2 / g2


def score_quadrature(y: ArrayLike, m: int, theta: ArrayLike, rule: QuadratureRule | None = None) -> FloatArray:
    """Derivative in theta of the adaptive quadrature estimate, nodes moving with the mode."""
    rule = default_rule() if rule is None else rule
    y_arr, theta_arr = np.broadcast_arrays(np.asarray(y, dtype=np.float64), np.asarray(theta, dtype=np.float64))
    b_hat, _, g2 = laplace_modes(y_arr, m, theta_arr)
    db, dg2 = _mode_derivatives(b_hat, g2, m, theta_arr)
    sigma, b = _adaptive_nodes(b_hat, g2, rule)
    dlog_sigma = -0.5 * dg2 / g2
    db_nodes = db[..., None] + SQRT2 * (sigma * dlog_sigma)[..., None] * rule.nodes

    terms = _node_log_terms(b, y_arr, m, theta_arr, rule)
    weights = np.exp(terms - logsumexp(terms, axis=-1, keepdims=True))
    t3 = theta_arr[..., None] ** 3
    slope = g_prime(b, y_arr[..., None], m, theta_arr[..., None])
    integrand = b * b / t3 - 1.0 / theta_arr[..., None] - slope * db_nodes
    return dlog_sigma + np.sum(weights * integrand, axis=-1)


def loglik_array(
    y: ArrayLike, m: int, theta: ArrayLike, method: Method | str, rule: QuadratureRule | None = None
) -> FloatArray:
    if Method(method) is Method.LAPLACE:
        return loglik_laplace(y, m, theta)
    return loglik_quadrature(y, m, theta, rule)


def score_array(
    y: ArrayLike, m: int, theta: ArrayLike, method: Method | str, rule: QuadratureRule | None = None
) -> FloatArray:
    if Method(method) is Method.LAPLACE:
        return score_laplace(y, m, theta)
    return score_quadrature(y, m, theta, rule)


def item_loglik_laplace(y: int, m: int, theta: float) -> float:
    """Laplace approximation -g(b_hat) + log sqrt(2 pi) - log(g2)/2."""
    return float(loglik_laplace(y, m, theta))


def item_loglik_quadrature(y: int, m: int, theta: float, rule: QuadratureRule | None = None) -> float:
    return float(loglik_quadrature(y, m, theta, rule))


def item_score(y: int, m: int, theta: float, method: Method | str, rule: QuadratureRule | None = None) -> float:
    return float(score_array(y, m, theta, method, rule))


def dataset_surface(
    dataset: TwoLevelDataset,
    method: Method | str,
    *,
    derivative_mode: DerivativeMode | str = DerivativeMode.FINITE_DIFFERENCE,
    rule: QuadratureRule | None = None,
) -> LikelihoodSurface:
    """
    Sum of item log-likelihoods as a surface over theta in (1e-4, 10).

    Items sharing a count are evaluated once and weighted by multiplicity,
    summed in ascending order of y.
    """
    method = Method(method)
    rule = default_rule() if rule is None else rule
    values, counts = dataset.counts()
    y = values.astype(np.float64)
    weights = counts.astype(np.float64)
    m = dataset.m

    def loglik(theta: ParamPoint) -> float:
        return float(np.dot(weights, loglik_array(y, m, float(theta[0]), method, rule)))

    def score(theta: ParamPoint) -> FloatArray:
        return np.array([float(np.dot(weights, score_array(y, m, float(theta[0]), method, rule)))])

    def grid(thetas: FloatArray) -> FloatArray:
        return weights @ loglik_array(y[:, None], m, np.asarray(thetas)[None, :], method, rule)

    analytic = DerivativeMode(derivative_mode) is DerivativeMode.ANALYTIC
    log.debug("dataset_surface.built", method=method.value, n=dataset.n, m=m, distinct=int(values.size))
    return LikelihoodSurface(
        loglik_fn=loglik,
        domain=default_domain(),
        score_fn=score if analytic else None,
        grid_fn=grid,
        name=f"twolevel-{method.value}",
    )
