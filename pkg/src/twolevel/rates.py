"""
Empirical convergence rates of the Laplace score error.

At fixed theta the per-item error shrinks like m^-2; its supremum over theta
is attained near theta ~ m^-1/2 and shrinks like m^-1/2. Both are measured on
random items drawn from the model, with analytic scores on each side.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.logging_setup import get_logger
from src.twolevel.likelihood import Method, item_score, score_array
from src.twolevel.models import QuadratureRule
from src.twolevel.simulate import simulate_two_level


log = get_logger(__name__)


@dataclass(frozen=True)
class RateFit:
    m_values: NDArray[np.float64]
    errors: NDArray[np.float64]
    slope: float
    locations: NDArray[np.float64] | None = None


def item_score_error(y: int, m: int, theta: float, rule: QuadratureRule | None = None) -> float:
    return abs(item_score(y, m, theta, Method.LAPLACE) - item_score(y, m, theta, Method.QUADRATURE, rule))


def score_error_array(
    y: ArrayLike, m: int, theta: ArrayLike, rule: QuadratureRule | None = None
) -> NDArray[np.float64]:
    return np.abs(score_array(y, m, theta, Method.LAPLACE) - score_array(y, m, theta, Method.QUADRATURE, rule))


def _slope(m_values: NDArray[np.float64], errors: NDArray[np.float64]) -> float:
    slope, _ = np.polyfit(np.log(m_values), np.log(errors), 1)
    return float(slope)


def _items(m: int, items: int, theta0: float, seed: int) -> NDArray[np.int64]:
    return simulate_two_level(items, m, theta0, seed, stream=(m,)).y_array()


def pointwise_rate_check(
    m_list: Sequence[int],
    items: int = 200,
    theta: float = 0.5,
    theta0: float = 0.5,
    seed: int = 1,
) -> RateFit:
    """Mean per-item |score error| at a fixed theta, with the log-log slope in m."""
    errors = []
    for m in m_list:
        ys = _items(m, items, theta0, seed)
        errors.append(float(np.mean(score_error_array(ys, m, theta))))
    m_values = np.asarray(m_list, dtype=np.float64)
    fit = RateFit(m_values, np.asarray(errors), _slope(m_values, np.asarray(errors)))
    log.info("rates.pointwise", m=list(m_list), errors=errors, slope=fit.slope)
    return fit


def sup_rate_check(
    m_list: Sequence[int],
    items: int = 200,
    grid: tuple[float, float, float] = (0.02, 3.0, 0.01),
    theta0: float = 0.5,
    seed: int = 1,
) -> RateFit:
    """
    Mean over items of the grid supremum of the score error, and the mean
    location of that supremum, for each m.
    """
    lo, hi, step = grid
    thetas = lo + step * np.arange(int(round((hi - lo) / step)) + 1)
    sups = []
    locations = []
    for m in m_list:
        values, counts = np.unique(_items(m, items, theta0, seed), return_counts=True)
        curves = score_error_array(values[:, None].astype(np.float64), m, thetas[None, :])
        weights = counts / counts.sum()
        sups.append(float(weights @ curves.max(axis=1)))
        locations.append(float(weights @ thetas[np.argmax(curves, axis=1)]))
    m_values = np.asarray(m_list, dtype=np.float64)
    fit = RateFit(m_values, np.asarray(sups), _slope(m_values, np.asarray(sups)), np.asarray(locations))
    log.info("rates.sup", m=list(m_list), sups=sups, locations=locations, slope=fit.slope)
    return fit
