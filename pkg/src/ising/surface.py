"""Ising log-likelihood surfaces and maximum-likelihood fits."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from src.inference.optimize import MaximizeResult, maximize
from src.inference.surface import Box, LikelihoodSurface, ParamPoint
from src.ising.lattice import BETA_C, BETA_MAX, IsingParams, LatticeSpec, SuffStats
from src.ising.partition import ZKind, ZMethod
from src.logging_setup import get_logger


log = get_logger(__name__)

ALPHA_BOUND = 5.0


def ising_loglik_surface(
    stats: SuffStats,
    lattice: LatticeSpec,
    method: ZMethod | str,
    *,
    alpha: float | None = 0.0,
) -> LikelihoodSurface:
    """
    l(alpha, beta) = alpha v0 + beta v1 - log Z(alpha, beta).

    With ``alpha`` a number the surface is one-dimensional in beta with the
    field pinned; ``alpha=None`` gives the two-dimensional (alpha, beta) surface.
    """
    z_method = ZMethod.parse(method)
    beta_hi = BETA_MAX if z_method.kind is ZKind.KAUFMAN else BETA_C

    if alpha is None:

        def loglik(theta: ParamPoint) -> float:
            params = IsingParams(float(theta[0]), float(theta[1]))
            return params.alpha * stats.v0 + params.beta * stats.v1 - z_method.log_z(lattice, params)

        domain = Box((-ALPHA_BOUND, 0.0), (ALPHA_BOUND, beta_hi))
    else:
        pinned = float(alpha)

        def loglik(theta: ParamPoint) -> float:
            params = IsingParams(pinned, float(theta[0]))
            return pinned * stats.v0 + params.beta * stats.v1 - z_method.log_z(lattice, params)

        domain = Box.interval(0.0, beta_hi)

    return LikelihoodSurface(loglik_fn=loglik, domain=domain, name=f"ising-{z_method}-{lattice}")


def ising_mle(
    stats: SuffStats,
    lattice: LatticeSpec,
    method: ZMethod | str,
    *,
    alpha: float | None = 0.0,
    theta_init: ArrayLike | None = None,
) -> MaximizeResult:
    surface = ising_loglik_surface(stats, lattice, method, alpha=alpha)
    if theta_init is None:
        theta_init = [0.2] if alpha is not None else [0.0, 0.2]
    result = maximize(surface, np.asarray(theta_init, dtype=np.float64))
    log.debug("ising.mle", surface=surface.name, theta=result.theta.tolist(), converged=result.converged)
    return result
