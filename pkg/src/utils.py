import math
import zlib
from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp

from src.logging_setup import get_logger


log = get_logger(__name__)


def signed_logsumexp(log_abs: ArrayLike, signs: ArrayLike) -> tuple[float, float]:
    """
    Return (log|s|, sign(s)) for s = sum(signs * exp(log_abs)).

    Terms with -inf magnitude contribute nothing; an exactly cancelling sum
    comes back as (-inf, 0.0).
    """
    a = np.asarray(log_abs, dtype=np.float64)
    b = np.asarray(signs, dtype=np.float64)
    value, sign = logsumexp(a, b=b, return_sign=True)
    return float(value), float(sign)


def round_half_up(x: float) -> int:
    """Round to the nearest integer with halves going up."""
    return math.floor(x + 0.5)


def stream_entropy(*parts: int | str) -> list[int]:
    """Turn a stream label such as (seed, "twolevel", cell, replicate) into SeedSequence entropy."""
    return [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts]


def counter_uniforms(entropy: Sequence[int], count: int) -> NDArray[np.float64]:
    """
    Open-interval uniforms from a Philox stream keyed by ``entropy``.

    Draw j depends only on the key and j, so item i can always be given draws
    2i and 2i+1 whatever the dataset size or worker layout.
    """
    key = np.random.SeedSequence(list(entropy)).generate_state(2, np.uint64)
    raw = np.random.Philox(key=key).random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 60,
) -> float:
    """
    Adaptive Simpson quadrature of ``f`` over [a, b].

    Used as an independent oracle for the Gauss-Hermite rules; slow but
    dependable for smooth integrands.
    """

    def simpson(fa: float, fm: float, fb: float, lo: float, hi: float) -> float:
        return (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(lo: float, hi: float, fa: float, fm: float, fb: float, whole: float, eps: float, depth: int) -> float:
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(lo, mid, fa, flm, fm, left, eps / 2.0, depth - 1) + recurse(
            mid, hi, fm, frm, fb, right, eps / 2.0, depth - 1
        )

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, a, b)
    result = recurse(a, b, fa, fm, fb, whole, tol, max_depth)
    log.debug("adaptive_simpson.done", a=a, b=b, value=result)
    return result
