"""
Error of the reduced-dependence approximation on an m x m lattice.

epsilon_k = log Z - log Z~(k) does not depend on the data. The exact constant
comes from the closed form (periodic, alpha = 0), from the transfer matrix,
or from a wider strip approximation Z~(K) used as a proxy. delta_k is the L1
norm of the gradient of epsilon_k.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from src.config import IsingCaps, load_config
from src.inference.errors import DomainError, NumericalError
from src.ising.kaufman import check_beta, kaufman_excess
from src.ising.lattice import Boundary, IsingParams, LatticeSpec
from src.ising.partition import ZKind, ZMethod, rda_log_z
from src.ising.spectral import a_beta
from src.logging_setup import get_logger


log = get_logger(__name__)


class InvalidProxyError(NumericalError):
    """Proxy strip width K must exceed k and fit the lattice."""

    def __init__(self, k: int, proxy_k: int, m: int) -> None:
        self.k = k
        self.proxy_k = proxy_k
        self.m = m
        super().__init__(f"proxy width K={proxy_k} must satisfy k={k} < K <= min(m={m}, cap)")


def _delta_h() -> float:
    return float((load_config().get("ising", {}) or {}).get("delta_h", 1e-5))


def _check_proxy(k: int, proxy_k: int, m: int) -> None:
    if proxy_k <= k or proxy_k > m or proxy_k > IsingCaps.from_config().rda_k:
        raise InvalidProxyError(k, proxy_k, m)


def epsilon_k(
    m: int,
    k: int,
    beta: float,
    exact_method: ZMethod | str = "kaufman",
    *,
    alpha: float = 0.0,
    boundary: Boundary | str | None = None,
) -> float:
    """
    log Z(m x m) - log Z~(k)(m x m).

    With the closed form the lattice is periodic and alpha must be 0; the
    difference is taken between the bounded excesses of log Abar so the large
    extensive parts cancel exactly. Other methods default to a free boundary.
    """
    method = ZMethod.parse(exact_method)
    if not 2 <= k <= m:
        raise ValueError(f"strip width k={k} must lie in [2, {m}]")
    if method.kind is ZKind.KAUFMAN:
        if alpha != 0.0:
            raise DomainError("the closed form has no external field", value=alpha)
        if boundary is not None and Boundary(boundary) is not Boundary.PERIODIC:
            raise DomainError("the closed form is for periodic lattices")
        check_beta(beta)
        if k == m:
            return 0.0
        return (
            kaufman_excess(m, m, beta)
            - (m - k + 1) * kaufman_excess(k, m, beta)
            + (m - k) * kaufman_excess(k - 1, m, beta)
        )

    lattice = LatticeSpec(m, m, Boundary(boundary or Boundary.FREE))
    params = IsingParams(alpha, beta)
    if method.kind in (ZKind.PROXY, ZKind.RDA):
        assert method.k is not None
        _check_proxy(k, method.k, m)
        return rda_log_z(method.k, lattice, params) - rda_log_z(k, lattice, params)
    return method.log_z(lattice, params) - rda_log_z(k, lattice, params)


def _central(fn, x: float, h: float) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def richardson_derivative(fn, x: float, h: float) -> float:
    """Central difference at steps h and h/2 combined once: (4 D(h/2) - D(h)) / 3."""
    return (4.0 * _central(fn, x, 0.5 * h) - _central(fn, x, h)) / 3.0


def epsilon_gradient(
    m: int,
    k: int,
    beta: float,
    exact_method: ZMethod | str = "kaufman",
    *,
    alpha: float = 0.0,
    boundary: Boundary | str | None = None,
    free_alpha: bool | None = None,
    h: float | None = None,
) -> np.ndarray:
    """(d/d alpha, d/d beta) of epsilon_k, or just d/d beta when alpha is pinned."""
    h = _delta_h() if h is None else h
    free_alpha = alpha != 0.0 if free_alpha is None else free_alpha

    def along_beta(b: float) -> float:
        return epsilon_k(m, k, b, exact_method, alpha=alpha, boundary=boundary)

    grad = [richardson_derivative(along_beta, beta, h)]
    if free_alpha:

        def along_alpha(a: float) -> float:
            return epsilon_k(m, k, beta, exact_method, alpha=a, boundary=boundary)

        grad.insert(0, richardson_derivative(along_alpha, alpha, h))
    return np.asarray(grad)


def delta_k(
    m: int,
    k: int,
    beta: float,
    exact_method: ZMethod | str = "kaufman",
    *,
    alpha: float = 0.0,
    boundary: Boundary | str | None = None,
    free_alpha: bool | None = None,
    h: float | None = None,
) -> float:
    """
    Score error of the k-strip approximation: |d epsilon / d beta| when alpha
    is pinned at 0, the L1 norm of the (alpha, beta) gradient otherwise.
    """
    grad = epsilon_gradient(
        m, k, beta, exact_method, alpha=alpha, boundary=boundary, free_alpha=free_alpha, h=h
    )
    return float(np.sum(np.abs(grad)))


@dataclass(frozen=True)
class ContourCell:
    m: int
    k: int
    alpha: float
    beta: float
    log_scaled_delta: float


# log(delta/m) tolerance for cells at least STABLE_GAP below the proxy width
STABLE_TOL = 0.01
STABLE_GAP = 8


@dataclass(frozen=True)
class StabilityCell:
    """
    One contour cell under proxy widths K and K-1.

    Dropping the proxy from K to K-1 moves log(delta/m) by roughly
    exp(-a_beta (K-1-k)), so only cells with k well below K can meet the 1%
    tolerance. Cells within STABLE_GAP of the proxy are held to that
    truncation bound instead.
    """

    m: int
    k: int
    proxy_k: int
    beta: float
    log_scaled_delta: float
    log_scaled_delta_smaller: float

    @property
    def abs_diff(self) -> float:
        return abs(self.log_scaled_delta - self.log_scaled_delta_smaller)

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / max(abs(self.log_scaled_delta), 1e-300)

    @property
    def truncation_bound(self) -> float:
        return float(np.exp(-a_beta(self.beta) * (self.proxy_k - 1 - self.k)))

    @property
    def stable(self) -> bool:
        if self.proxy_k - self.k >= STABLE_GAP:
            return self.abs_diff <= STABLE_TOL
        return self.abs_diff <= self.truncation_bound


def _cells(m_list: Sequence[int], k_list: Sequence[int]) -> list[tuple[int, int]]:
    return [(m, k) for m in sorted(set(m_list)) for k in sorted(set(k_list))]


def delta_contour(
    m_list: Sequence[int],
    k_list: Sequence[int],
    alpha: float,
    beta: float,
    K_proxy: int,
    *,
    boundary: Boundary | str = Boundary.FREE,
    threads: int = 1,
) -> list[ContourCell]:
    """log(delta_k / m) over the (m, k) grid, rows ordered by (m, k)."""
    if not m_list or not k_list:
        raise ValueError("m_list and k_list must be nonempty")
    for m in m_list:
        _check_proxy(max(k_list), K_proxy, m)
    method = ZMethod(ZKind.PROXY, K_proxy)

    def cell(mk: tuple[int, int]) -> ContourCell:
        m, k = mk
        value = delta_k(m, k, beta, method, alpha=alpha, boundary=boundary, free_alpha=True)
        return ContourCell(m, k, alpha, beta, float(np.log(value / m)))

    cells = _cells(m_list, k_list)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(cell, cells))
    log.info("contour.done", cells=len(rows), alpha=alpha, beta=beta, proxy_k=K_proxy)
    return rows


def contour_stability(
    m_list: Sequence[int],
    k_list: Sequence[int],
    alpha: float,
    beta: float,
    K_proxy: int,
    *,
    boundary: Boundary | str = Boundary.FREE,
    threads: int = 1,
) -> list[StabilityCell]:
    """Each contour cell recomputed with proxy width K-1 alongside K."""
    main = delta_contour(m_list, k_list, alpha, beta, K_proxy, boundary=boundary, threads=threads)
    smaller = delta_contour(m_list, k_list, alpha, beta, K_proxy - 1, boundary=boundary, threads=threads)
    cells = [
        StabilityCell(a.m, a.k, K_proxy, beta, a.log_scaled_delta, b.log_scaled_delta)
        for a, b in zip(main, smaller, strict=True)
    ]
    unstable = [(c.m, c.k) for c in cells if not c.stable]
    if unstable:
        log.warning("contour.unstable_cells", cells=unstable, proxy_k=K_proxy, beta=beta)
    return cells
