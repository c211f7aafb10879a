"""Market-world dynamics: the rebalance/impact feedback map and its phases."""

from .atlas import (
    PhaseGrid,
    PhaseLabel,
    boundary_distance,
    classify,
    classify_by_simulation,
    sweep,
    sweep_axes,
)
from .impact import (
    BLOWUP,
    UNDERFLOW,
    FeedbackMap,
    ImpactLaw,
    TrajectoryPoint,
    Transition,
    advance,
    impact_price_change,
    rebalance_share_change,
    step,
    unstable_fixed_point,
)
from .runner import Trajectory, TrajectoryRunner, default_state, halt_reason, simulate

__all__ = [
    "BLOWUP",
    "UNDERFLOW",
    "FeedbackMap",
    "ImpactLaw",
    "PhaseGrid",
    "PhaseLabel",
    "Trajectory",
    "TrajectoryPoint",
    "TrajectoryRunner",
    "Transition",
    "advance",
    "boundary_distance",
    "classify",
    "classify_by_simulation",
    "default_state",
    "halt_reason",
    "impact_price_change",
    "rebalance_share_change",
    "simulate",
    "step",
    "sweep",
    "sweep_axes",
    "unstable_fixed_point",
]
