"""Model-agnostic inference machinery shared by the two-level and Ising models."""

from src.inference.diagnostics import (
    ErrorDiagnostics,
    GodambeMatrices,
    RegionGrid,
    TestStatistics,
    godambe_sandwich,
    lr_statistic,
    score_error,
    sup_score_error,
    wald_and_score_statistics,
)
from src.inference.errors import NumericalError
from src.inference.optimize import ConfidenceInterval, chi2_quantile, lr_confidence_interval, maximize
from src.inference.posterior import PosteriorGrid, grid_posterior, penalized_surface, posterior_mode, tv_distance
from src.inference.surface import Box, EvalBundle, LikelihoodSurface, ParamPoint, fd_eval


__all__ = [
    "Box",
    "ConfidenceInterval",
    "ErrorDiagnostics",
    "EvalBundle",
    "GodambeMatrices",
    "LikelihoodSurface",
    "NumericalError",
    "ParamPoint",
    "PosteriorGrid",
    "RegionGrid",
    "TestStatistics",
    "chi2_quantile",
    "fd_eval",
    "godambe_sandwich",
    "grid_posterior",
    "lr_confidence_interval",
    "lr_statistic",
    "maximize",
    "penalized_surface",
    "posterior_mode",
    "score_error",
    "sup_score_error",
    "tv_distance",
    "wald_and_score_statistics",
]
