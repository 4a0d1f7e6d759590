"""
Closed-form log partition function of the zero-field Ising model on an n x m
torus:

    Z = {2 sinh(2 beta)}^(nm/2) * (A1 + A2 + A3 + A4) / 2

A1 and A2 are products of 2cosh and 2sinh of m a_l / 2 over odd l, A3 and A4
over even l, with a_l = acosh(c_beta - cos(pi l / n)) for l >= 1 and the signed
a_0 = 2 beta + log tanh(beta). Every product is accumulated in log space with
its sign kept separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from threading import Lock

import numpy as np
from cachetools import LRUCache, cached
from numpy.typing import ArrayLike, NDArray

from src.inference.errors import DomainError
from src.ising.lattice import BETA_MAX
from src.ising.spectral import c_beta, even_points, odd_points, remainders
from src.utils import signed_logsumexp


_MEAN_A_POINTS = 1 << 16


def check_beta(beta: float) -> None:
    if not 0.0 < beta <= BETA_MAX:
        raise DomainError(f"closed form needs beta in (0, {BETA_MAX}], got {beta}", value=beta)


def a_value(x: ArrayLike, beta: float) -> NDArray[np.float64]:
    return np.arccosh(c_beta(beta) - np.cos(np.asarray(x, dtype=np.float64)))


def a_zero(beta: float) -> float:
    return 2.0 * beta + math.log(math.tanh(beta))


def log_2cosh(x: NDArray[np.float64]) -> NDArray[np.float64]:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def log_abs_2sinh(x: NDArray[np.float64]) -> NDArray[np.float64]:
    ax = np.abs(x)
    with np.errstate(divide="ignore"):
        return ax + np.log1p(-np.exp(-2.0 * ax))


@dataclass(frozen=True)
class KaufmanTerms:
    n: int
    m: int
    beta: float
    a_odd: NDArray[np.float64]
    a_even: NDArray[np.float64]
    log_abs: NDArray[np.float64]
    signs: NDArray[np.float64]
    log_abar: float
    inclusive: bool = False

    @property
    def ratios(self) -> NDArray[np.float64]:
        """r_i = A_i / Abar; they sum to one."""
        return self.signs * np.exp(self.log_abs - self.log_abar)

    @property
    def r_odd(self) -> float:
        return float(self.ratios[0] + self.ratios[1])

    @property
    def r_even(self) -> float:
        return float(self.ratios[2] + self.ratios[3])

    def t_nm(self) -> float:
        """Trapezium remainders of f weighted by the odd and even ratio sums."""
        rem_odd, rem_even = remainders(self.n, self.beta)
        return rem_odd * self.r_odd + rem_even * self.r_even


def kaufman_terms(n: int, m: int, beta: float, *, inclusive: bool = False) -> KaufmanTerms:
    """
    The four products for an n x m torus.

    The classical formula takes q = 0..n-1 in each product; ``inclusive``
    takes q = 0..n, which does not reproduce the enumerated constant.
    """
    check_beta(beta)
    if n < 1 or m < 1:
        raise ValueError(f"lattice dimensions must be positive, got {n}x{m}")
    count = n + 1 if inclusive else n
    q = np.arange(count)
    a_odd = a_value(math.pi * (2 * q + 1) / n, beta)
    a_even = a_value(2.0 * math.pi * q / n, beta)
    a_even[0] = a_zero(beta)

    half_odd = 0.5 * m * a_odd
    half_even = 0.5 * m * a_even
    log_abs = np.array(
        [
            np.sum(log_2cosh(half_odd)),
            np.sum(log_abs_2sinh(half_odd)),
            np.sum(log_2cosh(half_even)),
            np.sum(log_abs_2sinh(half_even)),
        ]
    )
    signs = np.array([1.0, np.prod(np.sign(half_odd)), 1.0, np.prod(np.sign(half_even))])
    log_abar, sign = signed_logsumexp(log_abs, signs)
    if sign <= 0.0:
        raise DomainError(f"sum of products is not positive at beta={beta} ({n}x{m})", value=beta)
    return KaufmanTerms(n, m, beta, a_odd, a_even, log_abs, signs, log_abar, inclusive)


def kaufman_log_z(n: int, m: int, beta: float, *, inclusive: bool = False) -> float:
    """log Z for the n x m periodic lattice at alpha = 0."""
    terms = kaufman_terms(n, m, beta, inclusive=inclusive)
    return 0.5 * n * m * math.log(2.0 * math.sinh(2.0 * beta)) + terms.log_abar - math.log(2.0)


@cached(LRUCache(maxsize=1024), lock=Lock())
def mean_a(beta: float) -> float:
    """Mean of a(x) = acosh(c_beta - cos x) over one period."""
    x = 2.0 * math.pi * np.arange(_MEAN_A_POINTS) / _MEAN_A_POINTS
    return float(np.mean(a_value(x, beta)))


def kaufman_excess(n: int, m: int, beta: float) -> float:
    """
    E such that log Abar = (mn/2) * mean_a(beta) + E.

    E is (mn/2) times the odd-grid trapezium remainder of a(x) plus a bounded
    log term, so combinations of E over several n avoid cancelling the large
    (mn/2) mean_a parts.
    """
    check_beta(beta)
    a_odd = a_value(odd_points(n), beta)
    a_even = a_value(even_points(n), beta)
    zero = a_zero(beta)
    a_even[0] = abs(zero)
    sign4 = math.copysign(1.0, zero)

    with np.errstate(divide="ignore"):
        s1 = float(np.sum(np.log1p(np.exp(-m * a_odd))))
        s2 = float(np.sum(np.log1p(-np.exp(-m * a_odd))))
        s3 = float(np.sum(np.log1p(np.exp(-m * a_even))))
        s4 = float(np.sum(np.log1p(-np.exp(-m * a_even))))
    gap = 0.5 * m * (float(np.sum(a_even)) - float(np.sum(a_odd)))
    log_q, sign = signed_logsumexp([s1, s2, gap + s3, gap + s4], [1.0, 1.0, 1.0, sign4])
    if sign <= 0.0:
        raise DomainError(f"sum of products is not positive at beta={beta} ({n}x{m})", value=beta)
    remainder = float(np.mean(a_odd)) - mean_a(beta)
    return 0.5 * m * n * remainder + log_q
