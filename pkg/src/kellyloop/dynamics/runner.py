"""kellyloop.dynamics.runner
============================
Trajectory simulation with hook dispatch.

``TrajectoryRunner`` iterates a ``FeedbackMap`` and reports every point to
hooks, in the style of an event watcher:

* Override methods ``on_step(point)``, ``on_halt(trajectory)`` and
  ``on_error(error, point)``, or ``register_hook(name, callback)``.
* Hooks never break a simulation: failures go to ``on_error`` and are logged
  and swallowed. With ``raise_on_hook_error`` the last failure is collected
  in ``last_hook_error`` instead.
* Dynamics errors (a price driven to zero in full mode) are NOT hook errors;
  they propagate to the caller.

A run halts on ``x == 0`` (fixed_point), ``|x| < UNDERFLOW`` (underflow),
``|x| > BLOWUP`` or a non-finite ``x`` (blowup), or after ``n_steps`` points
(max_steps). The halting point is recorded; on blowup the state is not
advanced.

Frozen mode never advances the state: every point carries the initial
``S``, ``V``, ``theta``, ``phi`` and ``B``. Only full mode moves them.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Callable
from threading import Lock
from typing import TYPE_CHECKING, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from ..core.kelly import PortfolioState
from ..exceptions import ConfigurationException, InvalidParameterError
from .impact import (
    BLOWUP,
    UNDERFLOW,
    FeedbackMap,
    TrajectoryPoint,
    advance,
    rebalance_share_change,
)

if TYPE_CHECKING:
    import pandas as pd

logger = logging.getLogger("kellyloop.dynamics")

__all__ = [
    "HaltReason",
    "Trajectory",
    "TrajectoryRunner",
    "default_state",
    "halt_reason",
    "simulate",
]

HaltReason = Literal["fixed_point", "underflow", "blowup", "max_steps"]
HookFn = Callable[..., Any]


def halt_reason(x: float) -> HaltReason | None:
    """Why a run stops at ``x``, or None to keep iterating."""
    if x == 0.0:
        return "fixed_point"
    if not math.isfinite(x) or abs(x) > BLOWUP:
        return "blowup"
    if abs(x) < UNDERFLOW:
        return "underflow"
    return None


def default_state(fmap: FeedbackMap) -> PortfolioState:
    """Unit-price, unit-value state holding the map's leverage."""
    L = fmap.leverage
    return PortfolioState(theta=L, phi=1.0 - L, S=1.0, B=1.0, V=1.0)


class Trajectory(BaseModel):
    """A finished simulation."""

    points: tuple[TrajectoryPoint, ...]
    halt_reason: HaltReason
    feedback_map: FeedbackMap

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def xs(self) -> list[float]:
        return [p.x for p in self.points]

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        from .._export import trajectory_frame

        return trajectory_frame(self)


class TrajectoryRunner(BaseModel):
    """Iterates a feedback map and dispatches per-point hooks."""

    raise_on_hook_error: bool = Field(
        default=False,
        description="Collect hook errors in last_hook_error instead of only logging them",
    )

    _hooks: dict[str, list[HookFn]] = PrivateAttr(
        default_factory=lambda: defaultdict(list)
    )
    _lock: Lock = PrivateAttr(default_factory=Lock)
    _last_hook_error: Exception | None = PrivateAttr(default=None)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    # ---- hook registry -------------------------------------------------- #

    def register_hook(self, event_name: str, callback: HookFn) -> None:
        """Add a callback for an event name. Must be callable."""
        if not callable(callback):
            raise ConfigurationException(f"Hook must be callable, got {type(callback)}")
        with self._lock:
            self._hooks[event_name].append(callback)

    def unregister_hook(self, event_name: str, callback: HookFn) -> None:
        """Remove a previously registered callback (no-op if absent)."""
        with self._lock:
            if event_name in self._hooks and callback in self._hooks[event_name]:
                self._hooks[event_name].remove(callback)

    @property
    def last_hook_error(self) -> Exception | None:
        return self._last_hook_error

    # ---- simulation ----------------------------------------------------- #

    def run(
        self,
        fmap: FeedbackMap,
        x0: float,
        n_steps: int,
        initial_state: PortfolioState | None = None,
    ) -> Trajectory:
        """Iterate ``fmap`` from ``x0`` for at most ``n_steps`` recorded points."""
        if n_steps < 1:
            raise InvalidParameterError(f"n_steps must be >= 1, got {n_steps!r}")
        if math.isnan(x0):
            raise InvalidParameterError("x0 must not be NaN")
        state = initial_state if initial_state is not None else default_state(fmap)
        self._last_hook_error = None

        points: list[TrajectoryPoint] = []
        reason: HaltReason = "max_steps"
        x = x0
        for n in range(n_steps):
            stop = halt_reason(x)
            if stop == "blowup":
                point = self._point(n, x, rebalance_share_change(fmap, x, state), state)
            else:
                transition = advance(fmap, x, state)
                assert transition.state is not None
                state = transition.state
                point = self._point(n, x, transition.theta_change, state)
            points.append(point)
            self._dispatch_hook("on_step", point)
            if stop is not None:
                reason = stop
                break
            x = transition.x_next

        trajectory = Trajectory(points=tuple(points), halt_reason=reason, feedback_map=fmap)
        logger.debug(
            "trajectory halted (%s) after %d points, last x=%r",
            reason,
            len(points),
            points[-1].x,
        )
        self._dispatch_hook("on_halt", trajectory)
        return trajectory

    @staticmethod
    def _point(
        n: int, x: float, theta_change: float, state: PortfolioState
    ) -> TrajectoryPoint:
        return TrajectoryPoint(
            step=n,
            x=x,
            theta_change=theta_change,
            S=state.S,
            V=state.V,
            theta=state.theta,
            phi=state.phi,
            B=state.B,
        )

    # ---- hook dispatch -------------------------------------------------- #

    def _dispatch_hook(self, event_name: str, *args: Any) -> None:
        """Invoke the override method + registered callbacks. NEVER raises."""
        event = args[0] if args else None
        for hook in self._hook_callables(event_name):
            try:
                hook(*args)
            except Exception as e:
                self._safe_call("on_error", e, event)
                if self.raise_on_hook_error:
                    self._last_hook_error = e

    def _hook_callables(self, event_name: str) -> list[HookFn]:
        """Override method (bound) first, then registered callbacks."""
        candidate = getattr(self, event_name, None)
        fn = candidate if callable(candidate) else None
        with self._lock:
            callbacks = list(self._hooks.get(event_name, ()))
        return ([fn] if fn is not None else []) + callbacks

    def _safe_call(self, name: str, *args: Any) -> None:
        """Invoke a lifecycle hook; failures are logged, never raised."""
        try:
            fn = getattr(self, name, None)
            if fn is not None:
                fn(*args)
        except Exception as e:
            logger.error("hook %s failed: %s", name, e, exc_info=True)

    def on_error(self, error: Exception, event: Any = None) -> None:
        logger.error("trajectory hook failed: %s", error, exc_info=error)


def simulate(
    fmap: FeedbackMap,
    x0: float,
    n_steps: int,
    initial_state: PortfolioState | None = None,
) -> Trajectory:
    """Iterate ``fmap`` from ``x0`` without hooks."""
    return TrajectoryRunner().run(fmap, x0, n_steps, initial_state)
