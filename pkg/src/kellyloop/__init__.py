"""
kellyloop: Kelly-optimal leverage meets power-law price impact.

Public API:
* Belief world: ``MarketParams``, ``PortfolioState``, ``optimal_leverage``,
  ``optimal_allocation``, ``log_growth_drift``, ``kelly_fraction_binary``,
  ``self_financing_step``; geometric Levy models ``LevyModel`` /
  ``glm_optimal_leverage`` / ``glm_leverage_sensitivity``
* Market world: ``ImpactLaw``, ``FeedbackMap``, ``step``, ``simulate``,
  ``TrajectoryRunner``, ``unstable_fixed_point``
* Phases: ``PhaseLabel``, ``classify``, ``sweep``, ``PhaseGrid``
* Replication: ``CallSpec``, ``call_price``, ``atm_match``, ``general_match``
* Meta-strategy: ``detect_phase``, ``advise``
* Export: CSV and SVG writers (``write_phase_csv``, ``write_map_svg``, ...)
* Configuration: ``settings`` / ``KellyLoopSettings``
"""

from __future__ import annotations

from .config import KellyLoopSettings, settings
from .core import (
    LevyModel,
    MarketParams,
    PortfolioState,
    Sensitivity,
    binary_log_growth,
    brownian_model,
    get_model,
    glm_leverage_sensitivity,
    glm_log_utility_expansion,
    glm_optimal_leverage,
    jump_diffusion_model,
    kelly_fraction_binary,
    list_models,
    log_growth_drift,
    optimal_allocation,
    optimal_leverage,
    poisson_jump_model,
    register_model,
    self_financing_step,
)
from .dynamics import (
    FeedbackMap,
    ImpactLaw,
    PhaseGrid,
    PhaseLabel,
    Trajectory,
    TrajectoryPoint,
    TrajectoryRunner,
    boundary_distance,
    classify,
    classify_by_simulation,
    impact_price_change,
    rebalance_share_change,
    simulate,
    step,
    sweep,
    sweep_axes,
    unstable_fixed_point,
)
from .replication import (
    AtmSolution,
    CallQuote,
    CallSpec,
    MatchProblem,
    MatchSolution,
    atm_match,
    call_price,
    delta_check,
    general_match,
    scaling_family,
)
from ._export import (
    render_map_svg,
    render_phase_svg,
    write_map_svg,
    write_phase_csv,
    write_phase_svg,
    write_trajectory_csv,
)
from .strategy import Action, StrategyAdvice, advise, detect_phase

__version__ = "0.1.0"

__all__ = [
    # Belief world
    "MarketParams",
    "PortfolioState",
    "optimal_leverage",
    "optimal_allocation",
    "log_growth_drift",
    "kelly_fraction_binary",
    "binary_log_growth",
    "self_financing_step",
    # Levy models
    "LevyModel",
    "Sensitivity",
    "brownian_model",
    "poisson_jump_model",
    "jump_diffusion_model",
    "register_model",
    "get_model",
    "list_models",
    "glm_optimal_leverage",
    "glm_log_utility_expansion",
    "glm_leverage_sensitivity",
    # Feedback dynamics
    "ImpactLaw",
    "FeedbackMap",
    "TrajectoryPoint",
    "Trajectory",
    "TrajectoryRunner",
    "rebalance_share_change",
    "impact_price_change",
    "step",
    "simulate",
    "unstable_fixed_point",
    # Phases
    "PhaseLabel",
    "PhaseGrid",
    "classify",
    "classify_by_simulation",
    "boundary_distance",
    "sweep",
    "sweep_axes",
    # Replication
    "CallSpec",
    "CallQuote",
    "AtmSolution",
    "MatchProblem",
    "MatchSolution",
    "call_price",
    "delta_check",
    "atm_match",
    "scaling_family",
    "general_match",
    # Meta-strategy
    "Action",
    "StrategyAdvice",
    "advise",
    "detect_phase",
    # Export
    "write_trajectory_csv",
    "write_phase_csv",
    "write_phase_svg",
    "render_phase_svg",
    "write_map_svg",
    "render_map_svg",
    # Configuration
    "KellyLoopSettings",
    "settings",
]
