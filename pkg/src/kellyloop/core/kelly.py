"""kellyloop.core.kelly
=======================
Kelly-optimal leverage for one risky asset and one money-market account.

The investors believe the risky asset follows a geometric Brownian motion with
slowly varying market price of risk ``lambda``, volatility ``sigma`` and short
rate ``r``. Everything here lives in that belief world:

* ``MarketParams`` holds the slow variables; the drift ``mu = r + sigma*lambda``
  is derived, never stored.
* ``PortfolioState`` is a frozen snapshot satisfying the value identity
  ``theta*S + phi*B == V`` (relative 1e-12), checked at construction.
* Rebalancing is instantaneous and free. Price impact lives exclusively in
  ``kellyloop.dynamics``.
"""

from __future__ import annotations

import logging
import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import (
    DegenerateStateError,
    DynamicsBreakdownError,
    InvalidParameterError,
    InvalidProbabilityError,
    NoEdgeError,
)

logger = logging.getLogger("kellyloop.kelly")

__all__ = [
    "IDENTITY_RTOL",
    "MarketParams",
    "PortfolioState",
    "binary_log_growth",
    "kelly_fraction_binary",
    "log_growth_drift",
    "optimal_allocation",
    "optimal_leverage",
    "self_financing_step",
]

IDENTITY_RTOL = 1e-12
_PROBABILITY_ATOL = 1e-12


class MarketParams(BaseModel):
    """Slow variables believed by the Kelly investors."""

    lam: float = Field(
        alias="lambda",
        allow_inf_nan=False,
        description="Market price of risk (Sharpe ratio), dimensionless",
    )
    sigma: float = Field(gt=0, allow_inf_nan=False, description="Volatility")
    r: float = Field(default=0.0, allow_inf_nan=False, description="Short rate")

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    @property
    def mu(self) -> float:
        """Drift of the believed GBM, ``r + sigma*lambda``."""
        return self.r + self.sigma * self.lam

    @property
    def leverage(self) -> float:
        return optimal_leverage(self)


class PortfolioState(BaseModel):
    """Holdings and prices at one instant; ``V`` must equal ``theta*S + phi*B``."""

    theta: float = Field(allow_inf_nan=False, description="Shares of the risky asset")
    phi: float = Field(allow_inf_nan=False, description="Money-market units")
    S: float = Field(gt=0, allow_inf_nan=False, description="Risky price")
    B: float = Field(default=1.0, gt=0, allow_inf_nan=False, description="Money-market unit value")
    V: float = Field(allow_inf_nan=False, description="Portfolio value")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _value_identity(self) -> PortfolioState:
        self.check_identity()
        return self

    def check_identity(self, rtol: float = IDENTITY_RTOL) -> None:
        """Raise DegenerateStateError unless ``theta*S + phi*B == V`` to ``rtol``."""
        stock = self.theta * self.S
        cash = self.phi * self.B
        scale = max(abs(self.V), abs(stock), abs(cash))
        if abs(stock + cash - self.V) > rtol * scale:
            raise DegenerateStateError(
                f"value identity violated: theta*S + phi*B = {stock + cash!r} "
                f"but V = {self.V!r}"
            )

    @property
    def leverage(self) -> float:
        """Fraction of value held in the risky asset, ``theta*S/V``."""
        if self.V == 0:
            raise DegenerateStateError("leverage undefined for V == 0")
        return self.theta * self.S / self.V

    @classmethod
    def from_allocation(
        cls, params: MarketParams, S: float, V: float, B: float = 1.0
    ) -> PortfolioState:
        """The Kelly-optimal state for value ``V`` at prices ``(S, B)``."""
        theta, phi = _allocate(optimal_leverage(params), S, V, B)
        return cls(theta=theta, phi=phi, S=S, B=B, V=V)


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}")


def optimal_leverage(params: MarketParams) -> float:
    """Kelly leverage ratio ``lambda/sigma``, equivalently ``(mu - r)/sigma**2``.

    May be negative (short) or exceed one (levered); there are no caps.
    """
    _require_finite(lam=params.lam, sigma=params.sigma, r=params.r)
    if params.sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {params.sigma!r}")
    return params.lam / params.sigma


def _allocate(leverage: float, S: float, V: float, B: float) -> tuple[float, float]:
    if S == 0 or B == 0:
        raise DegenerateStateError(f"degenerate prices S={S!r}, B={B!r}")
    return leverage * V / S, (1.0 - leverage) * V / B


def optimal_allocation(
    params: MarketParams, state: PortfolioState
) -> tuple[float, float]:
    """Kelly-optimal ``(theta*, phi*)`` for the value and prices of ``state``."""
    return _allocate(optimal_leverage(params), state.S, state.V, state.B)


def log_growth_drift(params: MarketParams, leverage: float) -> float:
    """Drift of ``log V`` at a constant leverage: ``r + lambda*sigma*L - sigma**2*L**2/2``."""
    lam, sigma = params.lam, params.sigma
    return params.r + lam * sigma * leverage - 0.5 * sigma * sigma * leverage * leverage


def binary_log_growth(p: float, q: float, fraction: float) -> float:
    """Expected log growth of an even-money bet staking ``fraction`` of wealth."""
    if not -1.0 < fraction < 1.0:
        raise InvalidParameterError(f"fraction must lie in (-1, 1), got {fraction!r}")
    return p * math.log1p(fraction) + q * math.log1p(-fraction)


def kelly_fraction_binary(p: float, q: float) -> float:
    """Optimal stake ``p - q`` for a bet that doubles with ``p`` and loses with ``q``."""
    _require_finite(p=p, q=q)
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise InvalidProbabilityError(f"p and q must lie in (0, 1), got p={p!r}, q={q!r}")
    if abs(p + q - 1.0) > _PROBABILITY_ATOL:
        raise InvalidProbabilityError(f"p + q must equal 1, got {p + q!r}")
    if p <= q:
        raise NoEdgeError(f"no edge: p={p!r} <= q={q!r}")
    return p - q


def self_financing_step(
    params: MarketParams,
    state: PortfolioState,
    ds_over_s: float,
    dt: float = 1.0,
) -> PortfolioState:
    """Move prices by ``ds_over_s`` and ``r*dt``, then rebalance to Kelly weights.

    The value changes only through the holdings carried into the step,
    ``dV = theta*dS + phi*dB``; for an optimally held state this is
    ``V*(L*dS/S + (1 - L)*r*dt)``.
    """
    _require_finite(ds_over_s=ds_over_s, dt=dt)
    if 1.0 + ds_over_s <= 0.0:
        raise DynamicsBreakdownError(
            f"relative price change {ds_over_s!r} drives the price to <= 0"
        )
    dS = state.S * ds_over_s
    dB = state.B * params.r * dt
    S = state.S + dS
    B = state.B + dB
    if S <= 0.0 or B <= 0.0:
        raise DynamicsBreakdownError(f"non-positive prices after step: S={S!r}, B={B!r}")
    V = state.V + state.theta * dS + state.phi * dB
    theta, phi = _allocate(optimal_leverage(params), S, V, B)
    return PortfolioState(theta=theta, phi=phi, S=S, B=B, V=V)
