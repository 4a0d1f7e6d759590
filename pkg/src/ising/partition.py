"""
Exact and reduced-dependence log normalizing constants of the Ising model.

brute_force_log_z enumerates every configuration (oracle for small lattices);
transfer_log_z eliminates one column at a time over the 2^s column states,
s = min(r, c); rda_log_z combines strip constants; kaufman_log_z lives in
src.ising.kaufman. Results are memoized per (lattice, alpha, beta).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import StrEnum
from threading import Lock

import numpy as np
from cachetools import LRUCache, cached
from cachetools.keys import hashkey
from numpy.typing import NDArray
from scipy.special import logsumexp

from src.config import IsingCaps
from src.inference.errors import DomainError, SizeCapError
from src.ising.kaufman import kaufman_log_z
from src.ising.lattice import IsingParams, LatticeSpec, SpinConfig
from src.logging_setup import get_logger
from src.utils import counter_uniforms


log = get_logger(__name__)

_ENUM_CHUNK = 1 << 16


def _check_brute_size(lattice: LatticeSpec) -> None:
    cap = IsingCaps.from_config().brute_force_sites
    if lattice.sites > cap:
        log.warning("brute_force.cap_exceeded", lattice=str(lattice), cap=cap)
        raise SizeCapError("brute-force lattice sites", lattice.sites, cap)


def _chunk_spins(start: int, stop: int, sites: int) -> NDArray[np.int8]:
    """Spins of configurations start..stop-1; bit j of the index is site j, set bit = -1."""
    index = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (index >> np.arange(sites, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def _chunk_stats(spins: NDArray[np.int8], edges: NDArray[np.int64]) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    s = spins.astype(np.int64)
    return s.sum(axis=1), np.sum(s[:, edges[:, 0]] * s[:, edges[:, 1]], axis=1)


@cached(LRUCache(maxsize=64), lock=Lock())
def stat_histogram(lattice: LatticeSpec) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
    """Distinct (v0, v1) pairs over all 2^(rc) configurations and their log counts."""
    _check_brute_size(lattice)
    edges = lattice.edges()
    total = 1 << lattice.sites
    offset = lattice.edge_count
    width = 2 * offset + 1
    counts: dict[int, int] = {}
    for start in range(0, total, _ENUM_CHUNK):
        v0, v1 = _chunk_stats(_chunk_spins(start, min(total, start + _ENUM_CHUNK), lattice.sites), edges)
        keys, n = np.unique((v0 + lattice.sites) * width + (v1 + offset), return_counts=True)
        for key, count in zip(keys.tolist(), n.tolist(), strict=True):
            counts[key] = counts.get(key, 0) + count
    keys = np.array(sorted(counts), dtype=np.int64)
    v0 = keys // width - lattice.sites
    v1 = keys % width - offset
    log_counts = np.log(np.array([counts[k] for k in keys.tolist()], dtype=np.float64))
    log.debug("brute_force.histogram", lattice=str(lattice), configurations=total, distinct=int(keys.size))
    return v0, v1, log_counts


def brute_force_log_z(lattice: LatticeSpec, params: IsingParams) -> float:
    v0, v1, log_counts = stat_histogram(lattice)
    return float(logsumexp(log_counts + params.alpha * v0 + params.beta * v1))


def _column_states(s: int) -> NDArray[np.int64]:
    """(2^s, s) spins of each column state; site 0 is the most significant bit, set bit = -1."""
    index = np.arange(1 << s, dtype=np.int64)[:, None]
    bits = (index >> (s - 1 - np.arange(s, dtype=np.int64))) & 1
    return 1 - 2 * bits


def _column_log_weights(s: int, params: IsingParams, periodic: bool) -> NDArray[np.float64]:
    spins = _column_states(s)
    vertical = np.sum(spins[:, :-1] * spins[:, 1:], axis=1) if s > 1 else np.zeros(1 << s, dtype=np.int64)
    if periodic:
        vertical = vertical + spins[:, -1] * spins[:, 0]
    return params.alpha * spins.sum(axis=1) + params.beta * vertical


def _couple(v: NDArray[np.float64], s: int, ratio: float) -> NDArray[np.float64]:
    """Apply the horizontal kernel [[1, r], [r, 1]] (r = e^(-2 beta)) on every site axis."""
    batch = v.shape[0]
    for i in range(s):
        w = v.reshape(batch, 1 << i, 2, 1 << (s - i - 1))
        up = w[:, :, 0, :]
        down = w[:, :, 1, :]
        v = np.stack((up + ratio * down, ratio * up + down), axis=2).reshape(batch, 1 << s)
    return v


def _transfer_free(s: int, length: int, col_log: NDArray[np.float64], beta: float) -> float:
    cmax = float(col_log.max())
    weights = np.exp(col_log - cmax)
    ratio = math.exp(-2.0 * beta)
    v = weights[None, :].copy()
    log_scale = cmax
    for _ in range(1, length):
        v = _couple(v, s, ratio) * weights
        top = float(v.max())
        v /= top
        log_scale += s * beta + cmax + math.log(top)
    return float(math.log(v.sum()) + log_scale)


def _transfer_periodic(s: int, length: int, col_log: NDArray[np.float64], beta: float, block_entries: int) -> float:
    """Trace over the first column's state, anchors processed in blocks."""
    states = 1 << s
    cmax = float(col_log.max())
    weights = np.exp(col_log - cmax)
    ratio = math.exp(-2.0 * beta)
    chunk = max(1, block_entries // states)
    parts = []
    for start in range(0, states, chunk):
        anchors = np.arange(start, min(states, start + chunk))
        rows = np.arange(anchors.size)
        v = np.zeros((anchors.size, states))
        v[rows, anchors] = weights[anchors]
        log_scale = np.full(anchors.size, cmax)
        for _ in range(1, length):
            v = _couple(v, s, ratio) * weights
            top = v.max(axis=1, keepdims=True)
            v /= top
            log_scale += s * beta + cmax + np.log(top[:, 0])
        closing = _couple(v, s, ratio)[rows, anchors]
        parts.append(np.log(closing) + log_scale + s * beta)
    return float(logsumexp(np.concatenate(parts)))


_transfer_cache: LRUCache = LRUCache(maxsize=8192)
_transfer_lock = Lock()


@cached(_transfer_cache, key=lambda lattice, params: hashkey(lattice, params.alpha, params.beta), lock=_transfer_lock)
def transfer_log_z(lattice: LatticeSpec, params: IsingParams) -> float:
    """
    Variable elimination along the longer dimension.

    Field and vertical couplings (including the vertical wrap) enter as
    per-column weights; horizontal couplings are applied site by site. The
    horizontal wrap conditions on the first column's state.
    """
    s, length = sorted((lattice.r, lattice.c))
    caps = IsingCaps.from_config()
    if s > caps.transfer_width:
        log.warning("transfer.cap_exceeded", lattice=str(lattice), cap=caps.transfer_width)
        raise SizeCapError("transfer column height", s, caps.transfer_width)
    col_log = _column_log_weights(s, params, lattice.periodic)
    if lattice.periodic:
        value = _transfer_periodic(s, length, col_log, params.beta, caps.anchor_block_entries)
    else:
        value = _transfer_free(s, length, col_log, params.beta)
    log.debug("transfer.done", lattice=str(lattice), alpha=params.alpha, beta=params.beta, log_z=value)
    return value


def clear_caches() -> None:
    with _transfer_lock:
        _transfer_cache.clear()


def rda_log_z(k: int, lattice: LatticeSpec, params: IsingParams) -> float:
    """(r-k+1) log Z(k x c) - (r-k) log Z((k-1) x c), strips sharing the lattice's boundary."""
    cap = IsingCaps.from_config().rda_k
    if not 2 <= k <= lattice.r:
        raise ValueError(f"strip width k={k} must lie in [2, {lattice.r}]")
    if k > cap:
        raise SizeCapError("reduced-dependence strip width", k, cap)
    if k == lattice.r:
        return transfer_log_z(lattice, params)
    r = lattice.r
    return (r - k + 1) * transfer_log_z(lattice.with_rows(k), params) - (r - k) * transfer_log_z(
        lattice.with_rows(k - 1), params
    )


class ZKind(StrEnum):
    BRUTE = "brute"
    TRANSFER = "transfer"
    KAUFMAN = "kaufman"
    RDA = "rda"
    PROXY = "proxy"


_METHOD_RE = re.compile(r"^\s*(?P<kind>[a-z]+)\s*(?:\(\s*(?P<k>\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class ZMethod:
    """
    How log Z is computed. ``rda`` and ``proxy`` carry the strip width; they
    compute the same quantity, ``proxy`` naming its use as a stand-in for the
    exact constant.
    """

    kind: ZKind
    k: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ZKind(self.kind))
        needs_k = self.kind in (ZKind.RDA, ZKind.PROXY)
        if needs_k and (self.k is None or self.k < 2):
            raise ValueError(f"method {self.kind.value} needs a strip width >= 2")
        if not needs_k and self.k is not None:
            raise ValueError(f"method {self.kind.value} takes no strip width")

    @classmethod
    def parse(cls, text: str | ZMethod) -> ZMethod:
        """Accept 'brute', 'transfer', 'kaufman', 'rda(5)', 'proxy(12)'."""
        if isinstance(text, ZMethod):
            return text
        match = _METHOD_RE.match(text.lower())
        if match is None:
            raise ValueError(f"unrecognised method {text!r}")
        k = match.group("k")
        return cls(ZKind(match.group("kind")), int(k) if k is not None else None)

    def __str__(self) -> str:
        return self.kind.value if self.k is None else f"{self.kind.value}({self.k})"

    def log_z(self, lattice: LatticeSpec, params: IsingParams) -> float:
        if self.kind is ZKind.BRUTE:
            return brute_force_log_z(lattice, params)
        if self.kind is ZKind.TRANSFER:
            return transfer_log_z(lattice, params)
        if self.kind is ZKind.KAUFMAN:
            if not lattice.periodic or params.alpha != 0.0:
                raise DomainError("the closed form needs a periodic lattice and alpha = 0", value=params.alpha)
            return kaufman_log_z(lattice.r, lattice.c, params.beta)
        assert self.k is not None
        return rda_log_z(self.k, lattice, params)


def sample_configuration(lattice: LatticeSpec, params: IsingParams, seed: int) -> SpinConfig:
    """
    Exact draw from the Ising pmf by inversion over the enumeration order.

    Only for lattices within the brute-force cap.
    """
    _check_brute_size(lattice)
    log_z = brute_force_log_z(lattice, params)
    u = float(counter_uniforms([seed, lattice.r, lattice.c], 1)[0])
    edges = lattice.edges()
    total = 1 << lattice.sites
    cumulative = 0.0
    spins = None
    for start in range(0, total, _ENUM_CHUNK):
        stop = min(total, start + _ENUM_CHUNK)
        chunk = _chunk_spins(start, stop, lattice.sites)
        v0, v1 = _chunk_stats(chunk, edges)
        probs = np.exp(params.alpha * v0 + params.beta * v1 - log_z)
        running = cumulative + np.cumsum(probs)
        hit = np.searchsorted(running, u, side="right")
        if hit < probs.size:
            spins = chunk[hit]
            break
        cumulative = float(running[-1])
        spins = chunk[-1]
    assert spins is not None
    return SpinConfig.from_array(spins)
