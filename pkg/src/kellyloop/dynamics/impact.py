"""kellyloop.dynamics.impact
============================
The deterministic feedback loop between Kelly rebalancing and price impact.

Two relations are applied alternately:

* rebalance: a relative price change ``x`` makes the Kelly investors trade
  ``dtheta = A*(L - 1)*x`` shares, with ``A = |L*V/S|``;
* impact: trading ``dtheta`` shares moves the price by
  ``x = sign(dtheta)*(|dtheta|/kappa)**(1/gamma)``.

Composed, they give the one-dimensional map

    x' = g(x) = sign((L - 1)*x) * (A*|L - 1|*|x|/kappa)**(1/gamma)

In ``frozen`` mode ``A`` is a fixed ``A0`` and ``g`` is a pure 1-D map with a
closed-form fixed point. In ``full`` mode ``A`` is recomputed from the
portfolio state, which is advanced with the self-financing step of
``kellyloop.core.kelly`` after every price move.

Blowup is a signal, not an error: ``step`` returns ``+-inf`` when the power
overflows and callers compare against ``BLOWUP``.
"""

from __future__ import annotations

import math
from typing import Literal, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.kelly import MarketParams, PortfolioState, self_financing_step
from ..exceptions import ConfigurationException, DegenerateExponentError

__all__ = [
    "BLOWUP",
    "UNDERFLOW",
    "FeedbackMap",
    "ImpactLaw",
    "TrajectoryPoint",
    "Transition",
    "advance",
    "impact_price_change",
    "rebalance_share_change",
    "step",
    "unstable_fixed_point",
]

BLOWUP = 1e12
UNDERFLOW = 1e-15

Mode = Literal["frozen", "full"]


def _signed_power(value: float, exponent: float) -> float:
    """``sign(value)*|value|**exponent`` with overflow mapped to ``+-inf``."""
    if value == 0.0:
        return 0.0
    try:
        magnitude = math.pow(abs(value), exponent)
    except OverflowError:
        magnitude = math.inf
    return math.copysign(magnitude, value)


class ImpactLaw(BaseModel):
    """Power-law price impact ``(dS/S)**gamma ~ dtheta/kappa``."""

    gamma: float = Field(gt=0, allow_inf_nan=False, description="Impact exponent")
    kappa: float = Field(
        default=1.0,
        gt=0,
        allow_inf_nan=False,
        description="Shares traded per unit relative price change**gamma",
    )

    model_config = ConfigDict(frozen=True, extra="forbid")


class FeedbackMap(BaseModel):
    """The composite rebalance/impact map ``x_{n+1} = g(x_n)``."""

    leverage: float = Field(allow_inf_nan=False, description="Leverage ratio L")
    impact: ImpactLaw
    mode: Mode = "frozen"
    rebalance_scale: float | None = Field(
        default=None,
        gt=0,
        allow_inf_nan=False,
        description="Frozen prefactor A0 = L*V/S (frozen mode only)",
    )
    market: MarketParams | None = Field(
        default=None, description="Belief parameters driving full mode"
    )
    dt: float = Field(default=1.0, gt=0, allow_inf_nan=False, description="Rebalance interval")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _mode_fields(self) -> Self:
        if self.mode == "frozen":
            if self.rebalance_scale is None:
                raise ValueError("frozen mode requires rebalance_scale (A0 > 0)")
        else:
            if self.market is None:
                raise ValueError("full mode requires market parameters")
            implied = self.market.lam / self.market.sigma
            if not math.isclose(implied, self.leverage, rel_tol=1e-12, abs_tol=1e-15):
                raise ValueError(
                    f"full mode leverage {self.leverage!r} differs from "
                    f"lambda/sigma = {implied!r}"
                )
        return self

    @classmethod
    def frozen(
        cls,
        leverage: float,
        gamma: float,
        rebalance_scale: float = 1.0,
        kappa: float = 1.0,
    ) -> FeedbackMap:
        return cls(
            leverage=leverage,
            impact=ImpactLaw(gamma=gamma, kappa=kappa),
            rebalance_scale=rebalance_scale,
        )

    @classmethod
    def full(
        cls,
        market: MarketParams,
        gamma: float,
        kappa: float = 1.0,
        dt: float = 1.0,
    ) -> FeedbackMap:
        return cls(
            leverage=market.lam / market.sigma,
            impact=ImpactLaw(gamma=gamma, kappa=kappa),
            mode="full",
            market=market,
            dt=dt,
        )

    @property
    def gamma(self) -> float:
        return self.impact.gamma

    @property
    def kappa(self) -> float:
        return self.impact.kappa

    def scale(self, state: PortfolioState | None = None) -> float:
        """Rebalance prefactor ``A``: ``A0`` when frozen, ``|L*V/S|`` of ``state`` when full.

        ``A`` is a magnitude. The direction of the trade comes from ``(L - 1)*x``
        alone, so a short (``L < 0``) or underwater (``V < 0``) book still
        trades with ``sign((L - 1)*x)``.
        """
        if self.mode == "frozen":
            assert self.rebalance_scale is not None
            return self.rebalance_scale
        if state is None:
            raise ConfigurationException("full mode needs a PortfolioState")
        return abs(self.leverage * state.V / state.S)

    def slope(self, state: PortfolioState | None = None) -> float:
        """``A*|L - 1|/kappa``, the gain of the map before the power law."""
        return self.scale(state) * abs(self.leverage - 1.0) / self.kappa


class TrajectoryPoint(BaseModel):
    """One rebalance cycle: the price move ``x``, the trade it triggers, the state after it."""

    step: int = Field(ge=0)
    x: float = Field(description="Relative price change dS/S this step")
    theta_change: float = Field(description="Shares traded in response to x")
    S: float
    V: float
    theta: float
    phi: float
    B: float

    model_config = ConfigDict(frozen=True, extra="forbid")


class Transition(BaseModel):
    """Result of one full application of the map."""

    theta_change: float
    x_next: float
    state: PortfolioState | None = None

    model_config = ConfigDict(frozen=True, extra="forbid")


def rebalance_share_change(
    fmap: FeedbackMap, x: float, state: PortfolioState | None = None
) -> float:
    """Kelly trade ``A*(L - 1)*x``; zero iff ``x == 0`` or ``L == 1``."""
    return fmap.scale(state) * (fmap.leverage - 1.0) * x


def impact_price_change(law: ImpactLaw, dtheta: float) -> float:
    """Relative price change caused by trading ``dtheta`` shares (odd in ``dtheta``)."""
    return _signed_power(dtheta / law.kappa, 1.0 / law.gamma)


def advance(
    fmap: FeedbackMap, x: float, state: PortfolioState | None = None
) -> Transition:
    """Apply the price move ``x``, rebalance, and return the induced next move.

    Full mode moves ``state`` by ``x`` through the self-financing step
    (raising DynamicsBreakdownError if the price would reach zero); the trade
    uses ``A`` from the state the move starts from.
    Frozen mode returns ``state`` unchanged.
    """
    dtheta = rebalance_share_change(fmap, x, state)
    after = state
    if fmap.mode == "full":
        assert fmap.market is not None and state is not None
        after = self_financing_step(fmap.market, state, x, fmap.dt)
    return Transition(
        theta_change=dtheta,
        x_next=impact_price_change(fmap.impact, dtheta),
        state=after,
    )


def step(fmap: FeedbackMap, x: float, state: PortfolioState | None = None) -> float:
    """``x_{n+1} = g(x_n)``. ``state`` is required (and advanced) in full mode."""
    return advance(fmap, x, state).x_next


def unstable_fixed_point(fmap: FeedbackMap) -> float | None:
    """Magnitude ``x* = (A*|L - 1|/kappa)**(-1/(1 - gamma))`` where the curves cross.

    Returns None when ``L == 1`` (the rebalance line is flat). For ``L > 1``
    ``x*`` solves ``g(x) == x``; for ``L < 1`` the map flips sign and
    ``+-x*`` is a period-two orbit with ``|g(x*)| == x*``. With ``gamma < 1``
    the crossing is repelling (decay inside, explosion outside); with
    ``gamma > 1`` the same algebra gives an attracting magnitude. ``gamma == 1``
    makes the map linear and raises DegenerateExponentError.
    """
    if fmap.mode != "frozen":
        raise ConfigurationException("fixed point is defined for frozen mode only")
    if fmap.gamma == 1.0:
        raise DegenerateExponentError(
            "gamma == 1: the map is linear with slope A*|L - 1|/kappa; "
            "no isolated nonzero fixed point"
        )
    if fmap.leverage == 1.0:
        return None
    c = fmap.slope()
    try:
        return math.pow(c, -1.0 / (1.0 - fmap.gamma))
    except OverflowError:
        return math.inf
