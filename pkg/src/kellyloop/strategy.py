"""kellyloop.strategy
=====================
Meta-CTA rules: detect the phase of an observed return sequence and map a
phase to an action.

The model is deterministic, so detection is exact pattern matching on signs
and magnitudes; the 1e-9 ratio slack only absorbs floating-point noise.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from enum import StrEnum

from pydantic import BaseModel, ConfigDict

from .dynamics.atlas import PhaseLabel

logger = logging.getLogger("kellyloop.strategy")

__all__ = [
    "DEFAULT_MIN_LEN",
    "Action",
    "StrategyAdvice",
    "advise",
    "detect_phase",
]

DEFAULT_MIN_LEN = 6
RATIO_SLACK = 1e-9


class Action(StrEnum):
    REDUCE_EXPOSURE_OR_CONTRARIAN = "REDUCE_EXPOSURE_OR_CONTRARIAN"
    SELL_GAMMA = "SELL_GAMMA"
    NO_DIRECTIONAL_EDGE = "NO_DIRECTIONAL_EDGE"
    NONE = "NONE"


class StrategyAdvice(BaseModel):
    phase: PhaseLabel | None
    action: Action
    rationale: str

    model_config = ConfigDict(frozen=True, extra="forbid")


_RULES: dict[PhaseLabel, tuple[Action, str]] = {
    PhaseLabel.III: (
        Action.REDUCE_EXPOSURE_OR_CONTRARIAN,
        "Run-away trend: moves grow every step and a sharp reversion is due. "
        "Deviate from the rigid trend rule and cut exposure, or position for "
        "the reversal and the volatility spike.",
    ),
    PhaseLabel.II: (
        Action.SELL_GAMMA,
        "Moves keep their sign but shrink towards equilibrium: no large "
        "reversion and falling volatility favour selling gamma.",
    ),
    PhaseLabel.I: (
        Action.NO_DIRECTIONAL_EDGE,
        "Alternating, shrinking swings: volatility declines and there is no "
        "directional opportunity.",
    ),
    PhaseLabel.IV: (Action.NONE, "No rule for growing oscillations."),
    PhaseLabel.DEGENERATE: (Action.NONE, "No feedback, nothing to exploit."),
}


def advise(phase: PhaseLabel | None) -> StrategyAdvice:
    """Recommended action for a phase; ``None`` (inconclusive) maps to NONE."""
    if phase is None:
        return StrategyAdvice(
            phase=None, action=Action.NONE, rationale="Phase inconclusive."
        )
    action, rationale = _RULES[phase]
    return StrategyAdvice(phase=phase, action=action, rationale=rationale)


def detect_phase(
    returns: Sequence[float], min_len: int = DEFAULT_MIN_LEN
) -> PhaseLabel | None:
    """Phase of a return sequence, or None when inconclusive.

    Same signs with strictly growing ``|x|`` is III, strictly shrinking II;
    strictly alternating signs with shrinking ``|x|`` is I, growing IV.
    Anything else, a zero or non-finite return, or fewer than ``min_len``
    values is inconclusive.
    """
    xs = [float(v) for v in returns]
    if len(xs) < max(min_len, 2):
        logger.debug("inconclusive: %d returns < min_len %d", len(xs), min_len)
        return None
    if any(x == 0.0 or not math.isfinite(x) for x in xs):
        logger.debug("inconclusive: zero or non-finite return in window")
        return None

    pairs = list(zip(xs[:-1], xs[1:], strict=True))
    if all(a * b > 0 for a, b in pairs):
        oscillating = False
    elif all(a * b < 0 for a, b in pairs):
        oscillating = True
    else:
        return None

    ratios = [abs(b) / abs(a) for a, b in pairs]
    if all(q > 1.0 + RATIO_SLACK for q in ratios):
        growing = True
    elif all(q < 1.0 - RATIO_SLACK for q in ratios):
        growing = False
    else:
        return None
    return PhaseLabel.from_pattern(oscillating, growing)
