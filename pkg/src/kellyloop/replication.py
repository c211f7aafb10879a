"""kellyloop.replication
========================
A European call whose replicating portfolio is the Kelly portfolio.

The Black-Scholes call ``C = S*N(d1) - K*exp(-r*tau)*N(d2)`` is replicated
by ``N(d1)`` shares and ``-K*exp(-r*tau)*N(d2)`` in bonds. Holding a call is
Kelly-optimal when those weights match leverage ``L = lambda/sigma``:

    N(d1) = L*C/S
    N(d2) = -(1 - L)*C*exp(r*tau)/K

Because ``C`` is itself ``S*N(d1) - K*exp(-r*tau)*N(d2)``, the second equation
is the first multiplied by ``S*exp(r*tau)/K``: the system has rank one and
its solutions form a curve in ``(K, tau)``. ``general_match`` therefore pins
a strike or a maturity (or, with neither pinned, picks the solution closest
to at-the-money) and solves a bracketed one-dimensional problem.

At the money with ``r = 0`` the equations collapse to
``N(sigma*sqrt(tau)/2) = 1/(2 - sigma/lambda)``, solvable iff ``lambda > sigma``;
any ``(sigma/alpha, tau*alpha**2)`` solves it too.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from typing import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq
from scipy.special import ndtr

from .exceptions import InvalidParameterError, NoSolutionError, UnboundedSolutionError

logger = logging.getLogger("kellyloop.replication")

__all__ = [
    "ATM_CAP",
    "AtmSolution",
    "CallQuote",
    "CallSpec",
    "MatchProblem",
    "MatchSolution",
    "atm_match",
    "atm_residual",
    "call_price",
    "delta_check",
    "general_match",
    "matching_residuals",
    "normal_cdf",
    "scaling_family",
]

ATM_CAP = 50.0  # cap on sigma*sqrt(tau)
TAU_BOUNDS = (1e-3, 50.0)
MONEYNESS_BOUNDS = (0.01, 100.0)
MATCH_TOL = 1e-9
_GRID_POINTS = 161


def normal_cdf(z: float) -> float:
    """Standard normal CDF."""
    return float(ndtr(z))


class CallSpec(BaseModel):
    """European call contract and Black-Scholes market data."""

    S: float = Field(description="Spot", gt=0, allow_inf_nan=False)
    K: float = Field(description="Strike", gt=0, allow_inf_nan=False)
    sigma: float = Field(description="Volatility", gt=0, allow_inf_nan=False)
    r: float = Field(default=0.0, allow_inf_nan=False, description="Short rate")
    tau: float = Field(description="Time to maturity T - t", gt=0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def sigma_root_tau(self) -> float:
        return self.sigma * math.sqrt(self.tau)

    @property
    def d2(self) -> float:
        vol = self.sigma_root_tau
        return (math.log(self.S / self.K) + (self.r - 0.5 * self.sigma**2) * self.tau) / vol

    @property
    def d1(self) -> float:
        return self.d2 + self.sigma_root_tau

    def with_spot(self, S: float) -> CallSpec:
        return self.model_copy(update={"S": S})


class CallQuote(BaseModel):
    """Price and replication weights of a call."""

    price: float
    nd1: float = Field(description="Stock weight N(d1), the delta")
    nd2: float
    d1: float
    d2: float
    bond_weight: float = Field(description="-K*exp(-r*tau)*N(d2)")

    model_config = ConfigDict(frozen=True, extra="forbid")


def call_price(spec: CallSpec) -> CallQuote:
    """Black-Scholes value of ``spec`` with ``N(d1)`` and ``N(d2)``."""
    d1, d2 = spec.d1, spec.d2
    nd1, nd2 = normal_cdf(d1), normal_cdf(d2)
    discounted_strike = spec.K * math.exp(-spec.r * spec.tau)
    bond = -discounted_strike * nd2
    return CallQuote(
        price=spec.S * nd1 + bond,
        nd1=nd1,
        nd2=nd2,
        d1=d1,
        d2=d2,
        bond_weight=bond,
    )


def delta_check(spec: CallSpec, rel_step: float = 1e-4) -> float:
    """Central finite difference ``dC/dS`` with ``h = rel_step*S``."""
    h = rel_step * spec.S
    up = call_price(spec.with_spot(spec.S + h)).price
    down = call_price(spec.with_spot(spec.S - h)).price
    return (up - down) / (2.0 * h)


# ---- at the money, r = 0 ------------------------------------------------- #


class AtmSolution(BaseModel):
    """Root of ``N(sigma*sqrt(tau)/2) = 1/(2 - sigma/lambda)``."""

    sigma_root_tau: float
    target_nd1: float
    residual: float
    tau: float = Field(description="Maturity at the given sigma")

    model_config = ConfigDict(frozen=True, extra="forbid")


def _atm_target(leverage: float) -> float:
    return 1.0 / (2.0 - 1.0 / leverage)


def atm_residual(leverage: float, sigma: float, tau: float) -> float:
    """``N(sigma*sqrt(tau)/2) - 1/(2 - 1/L)`` for Kelly leverage ``L``."""
    return normal_cdf(0.5 * sigma * math.sqrt(tau)) - _atm_target(leverage)


def atm_match(lam: float, sigma: float) -> AtmSolution:
    """At-the-money, zero-rate call replicating the Kelly portfolio.

    Raises NoSolutionError when ``lambda <= sigma`` and UnboundedSolutionError
    when the root lies beyond ``sigma*sqrt(tau) = ATM_CAP``.
    """
    if not (math.isfinite(lam) and math.isfinite(sigma)) or sigma <= 0:
        raise InvalidParameterError(f"need finite lambda and sigma > 0, got {lam!r}, {sigma!r}")
    if lam <= sigma:
        raise NoSolutionError(f"no ATM solution for lambda={lam!r} <= sigma={sigma!r}")
    target = _atm_target(lam / sigma)

    def f(s: float) -> float:
        return normal_cdf(0.5 * s) - target

    if f(ATM_CAP) <= 0.0:
        raise UnboundedSolutionError(
            f"sigma*sqrt(tau) exceeds {ATM_CAP} for lambda/sigma={lam / sigma!r}"
        )
    if f(0.0) >= 0.0:
        root = 0.0
    else:
        root = float(brentq(f, 0.0, ATM_CAP, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return AtmSolution(
        sigma_root_tau=root,
        target_nd1=target,
        residual=f(root),
        tau=(root / sigma) ** 2,
    )


def scaling_family(sigma_star: float, tau_star: float, alpha: float) -> tuple[float, float]:
    """``(sigma/alpha, tau*alpha**2)``: same ``sigma*sqrt(tau)``, same ATM match."""
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidParameterError(f"alpha must be positive, got {alpha!r}")
    return sigma_star / alpha, tau_star * alpha * alpha


# ---- general strike and maturity ----------------------------------------- #


class MatchProblem(BaseModel):
    """Market data for the call-matching system; pin ``strike`` or ``tau`` optionally."""

    S: float = Field(description="Spot", gt=0, allow_inf_nan=False)
    sigma: float = Field(description="Volatility", gt=0, allow_inf_nan=False)
    r: float = Field(default=0.0, allow_inf_nan=False)
    lam: float = Field(alias="lambda", allow_inf_nan=False, description="Market price of risk")
    strike: float | None = Field(default=None, gt=0, allow_inf_nan=False)
    tau: float | None = Field(default=None, gt=0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _one_pin(self) -> Self:
        if self.strike is not None and self.tau is not None:
            raise ValueError("pin at most one of strike and tau")
        return self

    @property
    def leverage(self) -> float:
        return self.lam / self.sigma

    def spec(self, K: float, tau: float) -> CallSpec:
        return CallSpec(S=self.S, K=K, sigma=self.sigma, r=self.r, tau=tau)


class MatchSolution(BaseModel):
    """A call whose replication weights equal the Kelly weights."""

    K: float
    tau: float
    nd1: float
    nd2: float
    price: float
    residual_stock: float = Field(description="N(d1) - L*C/S")
    residual_bond: float = Field(description="N(d2) + (1 - L)*C*exp(r*tau)/K")

    model_config = ConfigDict(frozen=True, extra="forbid")


def matching_residuals(problem: MatchProblem, K: float, tau: float) -> tuple[float, float]:
    """Residuals of the stock and bond matching equations at ``(K, tau)``."""
    quote = call_price(problem.spec(K, tau))
    L = problem.leverage
    stock = quote.nd1 - L * quote.price / problem.S
    bond = quote.nd2 + (1.0 - L) * quote.price * math.exp(problem.r * tau) / K
    return stock, bond


def _satisfies_constraint(problem: MatchProblem, K: float, tau: float) -> bool:
    """``L*(K/S)*(exp(-r*tau) - 1) >= -1``, implied by ``N(d1) >= N(d2)``."""
    return problem.leverage * (K / problem.S) * math.expm1(-problem.r * tau) >= -1.0


def _stock_residual_in_log_tau(problem: MatchProblem, K: float) -> Callable[[float], float]:
    return lambda v: matching_residuals(problem, K, math.exp(v))[0]


def _stock_residual_in_log_strike(
    problem: MatchProblem, tau: float
) -> Callable[[float], float]:
    return lambda u: matching_residuals(problem, problem.S * math.exp(u), tau)[0]


def _bracketed_roots(f: Callable[[float], float], lo: float, hi: float) -> list[float]:
    """Roots of ``f`` on ``[lo, hi]`` from sign changes on a uniform grid."""
    grid = np.linspace(lo, hi, _GRID_POINTS)
    values = [f(float(v)) for v in grid]
    roots: list[float] = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:], strict=True):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(brentq(f, float(a), float(b), xtol=1e-14, rtol=1e-14)))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _accept(problem: MatchProblem, K: float, tau: float) -> MatchSolution | None:
    if not _satisfies_constraint(problem, K, tau):
        logger.debug("rejecting (K=%r, tau=%r): constraint violated", K, tau)
        return None
    stock, bond = matching_residuals(problem, K, tau)
    if abs(stock) >= MATCH_TOL or abs(bond) >= MATCH_TOL:
        logger.debug("rejecting (K=%r, tau=%r): residuals %r, %r", K, tau, stock, bond)
        return None
    quote = call_price(problem.spec(K, tau))
    if quote.price <= 0.0 or quote.nd1 <= 0.0:
        # both sides underflowed to zero: a worthless call, not a match
        logger.debug("rejecting (K=%r, tau=%r): call is worthless", K, tau)
        return None
    return MatchSolution(
        K=K,
        tau=tau,
        nd1=quote.nd1,
        nd2=quote.nd2,
        price=quote.price,
        residual_stock=stock,
        residual_bond=bond,
    )


def _solve_tau(problem: MatchProblem, K: float) -> list[MatchSolution]:
    lo, hi = (math.log(b) for b in TAU_BOUNDS)
    found = []
    for v in _bracketed_roots(_stock_residual_in_log_tau(problem, K), lo, hi):
        solution = _accept(problem, K, math.exp(v))
        if solution is not None:
            found.append(solution)
    return found


def general_match(problem: MatchProblem) -> MatchSolution | None:
    """Find ``(K, tau)`` whose call replicates the Kelly portfolio, or None.

    Searches in ``(log K/S, log tau)`` over ``K/S in [0.01, 100]`` and
    ``tau in [1e-3, 50]``. With a pinned strike (maturity) the smallest
    admissible maturity (the strike closest to spot) is returned; with
    nothing pinned, the solution with the smallest ``|log K/S|``.
    """
    if problem.strike is not None:
        candidates = _solve_tau(problem, problem.strike)
        return min(candidates, key=lambda s: s.tau, default=None)

    if problem.tau is not None:
        tau = problem.tau
        lo, hi = (math.log(b) for b in MONEYNESS_BOUNDS)
        candidates = []
        for u in _bracketed_roots(_stock_residual_in_log_strike(problem, tau), lo, hi):
            solution = _accept(problem, problem.S * math.exp(u), tau)
            if solution is not None:
                candidates.append(solution)
        return min(candidates, key=lambda s: abs(math.log(s.K / problem.S)), default=None)

    candidates = []
    for u in np.linspace(*(math.log(b) for b in MONEYNESS_BOUNDS), 81):
        candidates.extend(_solve_tau(problem, problem.S * math.exp(float(u))))
    if not candidates:
        logger.debug("no matching call for leverage %r", problem.leverage)
    return min(
        candidates,
        key=lambda s: (abs(math.log(s.K / problem.S)), s.tau),
        default=None,
    )
