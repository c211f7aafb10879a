"""kellyloop.dynamics.atlas
===========================
Phase classification of the feedback map and parameter sweeps.

Five labels cover the (gamma, L, x0) space:

* ``I``   oscillating decay      (L < 1, |x| shrinks)
* ``II``  monotone decay         (L > 1, |x| shrinks)
* ``III`` monotone explosion     (L > 1, |x| grows)
* ``IV``  oscillating explosion  (L < 1, |x| grows)
* ``DEGENERATE`` no feedback (L == 1) or neutral magnitude

``classify`` answers analytically in frozen mode: the sign pattern follows
from L vs 1 and growth from |x0| vs x* (and gamma vs 1). Full mode, and the
exact boundary |x0| == x*, go through ``classify_by_simulation``. For
gamma > 1 growth saturates at the attracting magnitude x*; it is still
labelled as growth because |x| increases along the whole run.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from enum import StrEnum
from typing import TYPE_CHECKING, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import MAX_WORKERS, SIM_STEPS
from ..core.kelly import PortfolioState
from ..exceptions import DynamicsBreakdownError, InvalidParameterError
from .impact import BLOWUP, UNDERFLOW, FeedbackMap, advance, unstable_fixed_point
from .runner import default_state

if TYPE_CHECKING:
    import pandas as pd

logger = logging.getLogger("kellyloop.atlas")

__all__ = [
    "PhaseGrid",
    "PhaseLabel",
    "boundary_distance",
    "classify",
    "classify_by_simulation",
    "sweep",
    "sweep_axes",
]


class PhaseLabel(StrEnum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    IV = "IV"
    DEGENERATE = "DEGENERATE"

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]

    @classmethod
    def from_pattern(cls, oscillating: bool, growing: bool) -> PhaseLabel:
        if oscillating:
            return cls.IV if growing else cls.I
        return cls.III if growing else cls.II


_DESCRIPTIONS = {
    PhaseLabel.I: "oscillating decay",
    PhaseLabel.II: "monotone decay",
    PhaseLabel.III: "monotone explosion",
    PhaseLabel.IV: "oscillating explosion",
    PhaseLabel.DEGENERATE: "degenerate",
}


def _require_nonzero(x0: float) -> None:
    if x0 == 0.0 or not math.isfinite(x0):
        raise InvalidParameterError(f"x0 must be finite and nonzero, got {x0!r}")


def boundary_distance(fmap: FeedbackMap, x0: float) -> float | None:
    """``|x0| - x*`` in frozen mode; None when there is no isolated x*."""
    if fmap.mode != "frozen" or fmap.gamma == 1.0:
        return None
    x_star = unstable_fixed_point(fmap)
    if x_star is None:
        return None
    return abs(x0) - x_star


def classify_by_simulation(
    fmap: FeedbackMap,
    x0: float,
    max_steps: int | None = None,
    initial_state: PortfolioState | None = None,
) -> PhaseLabel:
    """Label by iterating the map.

    Underflow means decay and blowup (or a price crash in full mode) means
    growth; a run that hits ``max_steps`` compares the last ``|x|`` with
    ``|x0|``. The sign pattern is read from the first nonzero transition.
    """
    _require_nonzero(x0)
    if fmap.leverage == 1.0:
        return PhaseLabel.DEGENERATE
    steps = max_steps if max_steps is not None else SIM_STEPS
    state = initial_state
    if fmap.mode == "full" and state is None:
        state = default_state(fmap)

    oscillating: bool | None = None
    x = x0
    growing: bool | None = None
    for _ in range(steps):
        try:
            transition = advance(fmap, x, state)
        except DynamicsBreakdownError:
            growing = True
            break
        state = transition.state
        x_next = transition.x_next
        if oscillating is None and x_next != 0.0:
            oscillating = x_next * x < 0
        if x_next == 0.0 or abs(x_next) < UNDERFLOW:
            growing = False
            break
        if not math.isfinite(x_next) or abs(x_next) > BLOWUP:
            growing = True
            break
        x = x_next
    if oscillating is None:
        oscillating = fmap.leverage < 1.0
    if growing is None:
        if abs(x) == abs(x0):
            return PhaseLabel.DEGENERATE
        growing = abs(x) > abs(x0)
    return PhaseLabel.from_pattern(oscillating, growing)


def classify(fmap: FeedbackMap, x0: float, max_steps: int | None = None) -> PhaseLabel:
    """Phase of the trajectory starting at ``x0``."""
    _require_nonzero(x0)
    if fmap.leverage == 1.0:
        return PhaseLabel.DEGENERATE
    if fmap.mode != "frozen":
        return classify_by_simulation(fmap, x0, max_steps)

    oscillating = fmap.leverage < 1.0
    if fmap.gamma == 1.0:
        c = fmap.slope()
        if c == 1.0:
            return PhaseLabel.DEGENERATE
        return PhaseLabel.from_pattern(oscillating, c > 1.0)

    x_star = unstable_fixed_point(fmap)
    assert x_star is not None
    magnitude = abs(x0)
    if magnitude == x_star:
        # exactly on the crossing: rounding decides which side the run drifts to
        return classify_by_simulation(fmap, x0, max_steps)
    below = magnitude < x_star
    growing = not below if fmap.gamma < 1.0 else below
    return PhaseLabel.from_pattern(oscillating, growing)


class PhaseGrid(BaseModel):
    """Labels on a (gamma, L) grid; ``labels[i][j]`` is at ``gamma_axis[i]``, ``lambda_axis[j]``."""

    lambda_axis: tuple[float, ...]
    gamma_axis: tuple[float, ...]
    x0: float
    labels: tuple[tuple[PhaseLabel, ...], ...]
    rebalance_scale: float = Field(description="Frozen prefactor A")
    kappa: float

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _dimensions(self) -> Self:
        if len(self.labels) != len(self.gamma_axis) or any(
            len(row) != len(self.lambda_axis) for row in self.labels
        ):
            raise ValueError("labels dimensions must equal (len(gamma_axis), len(lambda_axis))")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.gamma_axis), len(self.lambda_axis)

    def label_at(self, lambda_index: int, gamma_index: int) -> PhaseLabel:
        return self.labels[gamma_index][lambda_index]

    def cells(self) -> list[tuple[float, float, PhaseLabel]]:
        """``(lambda, gamma, label)`` rows, gamma outer and lambda inner."""
        return [
            (lam, gamma, self.labels[i][j])
            for i, gamma in enumerate(self.gamma_axis)
            for j, lam in enumerate(self.lambda_axis)
        ]

    def counts(self) -> dict[PhaseLabel, int]:
        tally = Counter(label for row in self.labels for label in row)
        return {label: tally.get(label, 0) for label in PhaseLabel}

    def feedback_map(self, lambda_index: int, gamma_index: int) -> FeedbackMap:
        return FeedbackMap.frozen(
            leverage=self.lambda_axis[lambda_index],
            gamma=self.gamma_axis[gamma_index],
            rebalance_scale=self.rebalance_scale,
            kappa=self.kappa,
        )

    def to_frame(self) -> pd.DataFrame:
        from .._export import phase_frame

        return phase_frame(self)


def _axis(bounds: tuple[float, float], resolution: int, name: str) -> list[float]:
    lo, hi = bounds
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidParameterError(f"{name} range must be finite with min <= max, got {bounds!r}")
    if lo == hi:
        return [float(lo)]
    if resolution < 2:
        raise InvalidParameterError(f"{name} resolution must be >= 2, got {resolution!r}")
    return [float(v) for v in np.linspace(lo, hi, resolution)]


def sweep_axes(
    lambda_axis: Sequence[float],
    gamma_axis: Sequence[float],
    x0: float,
    rebalance_scale: float = 1.0,
    kappa: float = 1.0,
    max_workers: int | None = None,
) -> PhaseGrid:
    """Classify every node of explicit axes (frozen mode).

    Cells are independent and handed to a thread pool. The work is pure
    Python and holds the GIL, so the pool bounds and orders evaluation rather
    than speeding it up; ``Executor.map`` returns cells in submission order,
    so the grid never depends on scheduling or ``max_workers``.
    """
    _require_nonzero(x0)
    lambdas = tuple(float(v) for v in lambda_axis)
    gammas = tuple(float(v) for v in gamma_axis)
    if not lambdas or not gammas:
        raise InvalidParameterError("sweep axes must be nonempty")

    def cell(node: tuple[float, float]) -> PhaseLabel:
        gamma, lam = node
        fmap = FeedbackMap.frozen(
            leverage=lam, gamma=gamma, rebalance_scale=rebalance_scale, kappa=kappa
        )
        return classify(fmap, x0)

    nodes = [(gamma, lam) for gamma in gammas for lam in lambdas]
    workers = max_workers if max_workers is not None else (MAX_WORKERS or None)
    logger.info(
        "sweeping %d x %d phase grid (x0=%r, workers=%s)",
        len(gammas),
        len(lambdas),
        x0,
        workers or "auto",
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        flat = list(pool.map(cell, nodes))
    n = len(lambdas)
    labels = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(len(gammas)))
    grid = PhaseGrid(
        lambda_axis=lambdas,
        gamma_axis=gammas,
        x0=x0,
        labels=labels,
        rebalance_scale=rebalance_scale,
        kappa=kappa,
    )
    logger.info("sweep done: %s", {str(k): v for k, v in grid.counts().items() if v})
    return grid


def sweep(
    lambda_range: tuple[float, float],
    gamma_range: tuple[float, float],
    x0: float,
    rebalance_scale: float = 1.0,
    kappa: float = 1.0,
    resolution: int | tuple[int, int] = 41,
    max_workers: int | None = None,
) -> PhaseGrid:
    """Phase grid over ``linspace`` axes; ``resolution`` is per axis (lambda, gamma).

    A range with ``min == max`` collapses to a single node.
    """
    if isinstance(resolution, int):
        n_lambda = n_gamma = resolution
    else:
        n_lambda, n_gamma = resolution
    return sweep_axes(
        _axis(lambda_range, n_lambda, "lambda"),
        _axis(gamma_range, n_gamma, "gamma"),
        x0,
        rebalance_scale=rebalance_scale,
        kappa=kappa,
        max_workers=max_workers,
    )
