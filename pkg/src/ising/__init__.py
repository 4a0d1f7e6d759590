"""Ising model: exact and reduced-dependence normalizing constants and their errors."""

from src.ising.approximation import (
    ContourCell,
    InvalidProxyError,
    StabilityCell,
    contour_stability,
    delta_contour,
    delta_k,
    epsilon_k,
)
from src.ising.kaufman import KaufmanTerms, kaufman_log_z, kaufman_terms
from src.ising.lattice import BETA_C, BETA_MAX, Boundary, IsingParams, LatticeSpec, SpinConfig, SuffStats, suff_stats
from src.ising.partition import (
    ZKind,
    ZMethod,
    brute_force_log_z,
    rda_log_z,
    sample_configuration,
    transfer_log_z,
)
from src.ising.spectral import (
    DecayFit,
    KSchedule,
    RemainderUnderflowError,
    SpectralQuantities,
    b_beta,
    k_schedule,
    spectral_quantities,
    trapezium_decay_check,
)
from src.ising.surface import ising_loglik_surface, ising_mle


__all__ = [
    "BETA_C",
    "BETA_MAX",
    "Boundary",
    "ContourCell",
    "DecayFit",
    "InvalidProxyError",
    "IsingParams",
    "KSchedule",
    "KaufmanTerms",
    "LatticeSpec",
    "RemainderUnderflowError",
    "SpectralQuantities",
    "SpinConfig",
    "StabilityCell",
    "SuffStats",
    "ZKind",
    "ZMethod",
    "b_beta",
    "brute_force_log_z",
    "contour_stability",
    "delta_contour",
    "delta_k",
    "epsilon_k",
    "ising_loglik_surface",
    "ising_mle",
    "k_schedule",
    "kaufman_log_z",
    "kaufman_terms",
    "rda_log_z",
    "sample_configuration",
    "spectral_quantities",
    "suff_stats",
    "transfer_log_z",
    "trapezium_decay_check",
]
