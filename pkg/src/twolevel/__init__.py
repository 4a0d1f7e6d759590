"""Two-level binomial-logit model with Laplace and adaptive-quadrature likelihoods."""

from src.twolevel.likelihood import (
    Method,
    ModeFailureError,
    dataset_surface,
    item_loglik_laplace,
    item_loglik_quadrature,
    item_score,
    laplace_mode,
    laplace_modes,
    loglik_array,
    score_array,
)
from src.twolevel.models import LaplaceFit, QuadratureRule, TwoLevelDataset
from src.twolevel.rates import RateFit, pointwise_rate_check, sup_rate_check
from src.twolevel.simulate import mn_schedule, simulate_two_level


__all__ = [
    "LaplaceFit",
    "Method",
    "ModeFailureError",
    "QuadratureRule",
    "RateFit",
    "TwoLevelDataset",
    "dataset_surface",
    "item_loglik_laplace",
    "item_loglik_quadrature",
    "item_score",
    "laplace_mode",
    "laplace_modes",
    "loglik_array",
    "mn_schedule",
    "pointwise_rate_check",
    "score_array",
    "simulate_two_level",
    "sup_rate_check",
]
