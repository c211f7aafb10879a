"""Belief-world portfolio maths: GBM Kelly leverage and geometric Levy models."""

from .kelly import (
    MarketParams,
    PortfolioState,
    binary_log_growth,
    kelly_fraction_binary,
    log_growth_drift,
    optimal_allocation,
    optimal_leverage,
    self_financing_step,
)
from .levy import (
    LevyModel,
    Sensitivity,
    brownian_model,
    get_model,
    glm_leverage_sensitivity,
    glm_log_utility_expansion,
    glm_optimal_leverage,
    jump_diffusion_model,
    list_models,
    poisson_jump_model,
    register_model,
)

__all__ = [
    "LevyModel",
    "MarketParams",
    "PortfolioState",
    "Sensitivity",
    "binary_log_growth",
    "brownian_model",
    "get_model",
    "glm_leverage_sensitivity",
    "glm_log_utility_expansion",
    "glm_optimal_leverage",
    "jump_diffusion_model",
    "kelly_fraction_binary",
    "list_models",
    "log_growth_drift",
    "optimal_allocation",
    "optimal_leverage",
    "poisson_jump_model",
    "register_model",
]
