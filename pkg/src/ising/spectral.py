"""
Closed-form spectral quantities of the zero-field periodic Ising model below
the critical point: c_beta, d_beta, the branch-point distance a_beta and
b_beta = 2 a_beta, the integrand f(x; beta) whose trapezium sums appear in
the derivative of log Z, and the k schedule for reduced-dependence strips.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from threading import Lock
from typing import NamedTuple

import numpy as np
from cachetools import LRUCache, cached
from numpy.typing import ArrayLike, NDArray

from src.config import load_config
from src.inference.errors import DomainError, NumericalError
from src.ising.lattice import BETA_C
from src.logging_setup import get_logger


log = get_logger(__name__)

_TWO_PI = 2.0 * math.pi


class RemainderUnderflowError(NumericalError):
    """A trapezium remainder is too small to take logs of; use smaller n."""

    def __init__(self, n: int, remainder: float) -> None:
        self.n = n
        self.remainder = remainder
        super().__init__(f"trapezium remainder {remainder:.3e} at n={n} underflows; reduce n_list")


def _check_subcritical(beta: float) -> None:
    if not 0.0 < beta < BETA_C:
        raise DomainError(f"beta={beta} outside (0, beta_c={BETA_C:.6f})", value=beta)


def c_beta(beta: float) -> float:
    return math.cosh(2.0 * beta) ** 2 / math.sinh(2.0 * beta)


def d_beta(beta: float) -> float:
    ch = math.cosh(2.0 * beta)
    coth = 1.0 / math.tanh(2.0 * beta)
    return 4.0 * ch - 2.0 * ch * coth * coth


def a_beta(beta: float) -> float:
    """Distance from the real axis of the nearest branch point of f(.; beta)."""
    if beta <= 0.0 or beta > BETA_C:
        raise DomainError(f"beta={beta} outside (0, beta_c]", value=beta)
    return math.acosh(max(c_beta(beta) - 1.0, 1.0))


def b_beta(beta: float) -> float:
    """b_beta = 2 acosh(c_beta - 1); zero at beta_c, unbounded as beta -> 0."""
    return 2.0 * a_beta(beta)


def f_integrand(x: ArrayLike, beta: float) -> NDArray[np.float64]:
    """f(x; beta) = d_beta {c_beta - 1 - cos x}^(-1/2) {c_beta + 1 - cos x}^(-1/2)."""
    c = c_beta(beta)
    cos_x = np.cos(np.asarray(x, dtype=np.float64))
    return d_beta(beta) / np.sqrt((c - 1.0 - cos_x) * (c + 1.0 - cos_x))


def _reference_points() -> int:
    return int((load_config().get("ising", {}) or {}).get("reference_points", 1_000_000))


@cached(LRUCache(maxsize=256), lock=Lock())
def mean_f(beta: float, points: int | None = None) -> float:
    """I(beta), the mean of f over one period, by a fine trapezium rule."""
    _check_subcritical(beta)
    points = _reference_points() if points is None else points
    x = _TWO_PI * np.arange(points) / points
    return float(np.mean(f_integrand(x, beta)))


def odd_points(n: int) -> NDArray[np.float64]:
    return math.pi * (2.0 * np.arange(n) + 1.0) / n


def even_points(n: int) -> NDArray[np.float64]:
    return _TWO_PI * np.arange(n) / n


def trapezium_sums(n: int, beta: float) -> tuple[float, float]:
    """(S_odd, S_even): sums of f over the shifted and unshifted n-point grids."""
    _check_subcritical(beta)
    return float(np.sum(f_integrand(odd_points(n), beta))), float(np.sum(f_integrand(even_points(n), beta)))


def remainders(n: int, beta: float) -> tuple[float, float]:
    s_odd, s_even = trapezium_sums(n, beta)
    reference = mean_f(beta)
    return s_odd / n - reference, s_even / n - reference


@dataclass(frozen=True)
class SpectralQuantities:
    beta: float
    c_beta: float
    d_beta: float
    a_beta: float
    b_beta: float
    I_beta: float
    n: NDArray[np.int64]
    S_odd: NDArray[np.float64]
    S_even: NDArray[np.float64]
    R_odd: NDArray[np.float64]
    R_even: NDArray[np.float64]

    @property
    def R(self) -> NDArray[np.float64]:
        return np.maximum(np.abs(self.R_odd), np.abs(self.R_even))


def spectral_quantities(beta: float, n_list: Sequence[int]) -> SpectralQuantities:
    _check_subcritical(beta)
    n = np.asarray(list(n_list), dtype=np.int64)
    sums = np.array([trapezium_sums(int(k), beta) for k in n]).reshape(-1, 2)
    reference = mean_f(beta)
    return SpectralQuantities(
        beta=beta,
        c_beta=c_beta(beta),
        d_beta=d_beta(beta),
        a_beta=a_beta(beta),
        b_beta=b_beta(beta),
        I_beta=reference,
        n=n,
        S_odd=sums[:, 0],
        S_even=sums[:, 1],
        R_odd=sums[:, 0] / n - reference,
        R_even=sums[:, 1] / n - reference,
    )


@dataclass(frozen=True)
class DecayFit:
    beta: float
    rate: float
    a_beta: float
    b_beta: float
    n: NDArray[np.int64]
    remainders: NDArray[np.float64]

    @property
    def relative_to_a(self) -> float:
        return abs(-self.rate - self.a_beta) / self.a_beta

    @property
    def relative_to_b(self) -> float:
        return abs(-self.rate - self.b_beta) / self.b_beta


def trapezium_decay_check(beta: float, n_list: Sequence[int], floor: float = 1e-300) -> DecayFit:
    """
    Fit the slope of log max(|R_odd|, |R_even|) against n.

    The remainders fall like exp(-a_beta n) up to a power of n; both a_beta
    and b_beta are reported for comparison.
    """
    if not 0.05 < beta < 0.42:
        raise DomainError(f"decay check needs beta in (0.05, 0.42), got {beta}", value=beta)
    if len(n_list) < 4:
        raise ValueError(f"need at least four values of n, got {len(n_list)}")
    quantities = spectral_quantities(beta, n_list)
    remainder = quantities.R
    for n, value in zip(quantities.n.tolist(), remainder.tolist(), strict=True):
        if value < floor:
            raise RemainderUnderflowError(n, value)
        if value < 1e3 * np.finfo(float).eps * abs(quantities.I_beta):
            log.warning("trapezium.remainder_at_roundoff", beta=beta, n=n, remainder=value)
    slope, _ = np.polyfit(quantities.n.astype(np.float64), np.log(remainder), 1)
    fit = DecayFit(beta, float(slope), quantities.a_beta, quantities.b_beta, quantities.n, remainder)
    log.debug("trapezium.decay", beta=beta, rate=fit.rate, a_beta=fit.a_beta, b_beta=fit.b_beta)
    return fit


class KSchedule(NamedTuple):
    k: int
    insufficient: bool


def k_schedule(m: int, beta0: float, c_mult: float) -> KSchedule:
    """k_m = clamp(ceil(c_mult ln m), 2, min(m, 16)); flagged when c_mult <= 1/b_beta(beta0)."""
    if m < 3:
        raise ValueError(f"k schedule needs m >= 3, got {m}")
    raw = math.ceil(c_mult * math.log(m)) if c_mult > 0 else 2
    k = min(max(raw, 2), min(m, 16))
    insufficient = c_mult <= 1.0 / b_beta(beta0)
    if insufficient:
        log.warning("k_schedule.insufficient", m=m, beta0=beta0, c_mult=c_mult, threshold=1.0 / b_beta(beta0))
    return KSchedule(k, insufficient)
