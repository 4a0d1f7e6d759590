"""Data generation and the trials-per-item schedule."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from scipy.special import expit, ndtri
from scipy.stats import binom

from src.logging_setup import get_logger
from src.twolevel.models import TwoLevelDataset
from src.utils import counter_uniforms, round_half_up


log = get_logger(__name__)


def simulate_two_level(
    n: int,
    m: int,
    theta0: float,
    seed: int,
    stream: Sequence[int] = (),
) -> TwoLevelDataset:
    """
    Draw b_i ~ N(0, theta0^2) and y_i ~ Binomial(m, expit(b_i)) by inversion.

    Item i consumes uniforms 2i and 2i+1 of the stream keyed by
    (seed, *stream), so the first k items never depend on n.
    """
    if n < 1 or m < 1:
        raise ValueError(f"need n, m >= 1, got n={n}, m={m}")
    if theta0 < 0:
        raise ValueError(f"theta0 must be non-negative, got {theta0}")
    u = counter_uniforms([seed, *stream], 2 * n).reshape(n, 2)
    b = theta0 * ndtri(u[:, 0])
    y = binom.ppf(u[:, 1], m, expit(b)).astype(np.int64)
    return TwoLevelDataset(n=n, m=m, y=y.tolist(), theta0=theta0, seed=seed)


def mn_schedule(n: int, a: float, *, literal: bool = False) -> int:
    """
    Trials per item, round-half-up of 5 + 4(n^a - 1000^a) clamped below at 1.

    ``literal=True`` takes the minimum with 1 instead, which is 1 for every n.
    """
    if n < 1000:
        raise ValueError(f"schedule is defined for n >= 1000, got {n}")
    if not 0.0 < a < 1.0:
        raise ValueError(f"exponent a must lie in (0, 1), got {a}")
    value = round_half_up(5.0 + 4.0 * (n**a - 1000.0**a))
    return min(1, value) if literal else max(1, value)
