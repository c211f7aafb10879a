"""kellyloop.core.levy
======================
Kelly leverage for geometric Levy models (GLM).

A GLM asset is ``S_t = S_0 * exp(r*t + R(lambda, sigma)*t + sigma*X_t - psi(sigma)*t)``
with ``<exp(sigma*X_t)> = exp(psi(sigma)*t)``. The process ``X_t`` is never
sampled; a model is fully described by its exponent ``psi`` and risk premium
``R``. Expanding ``<log V_t>`` to first order in ``t`` gives a concave
quadratic in the invested fraction whose maximizer is

    L_hat = R(lambda, sigma) / (psi(2*sigma) - 2*psi(sigma))

Three models ship built in (``brownian``, ``poisson-jump``, ``jump-diffusion``);
custom models are registered through ``register_model``. Exponents are
compensated so that ``psi(0) == 0``; models violating it are rejected.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from threading import Lock
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import ConfigurationException, DegenerateExponentError

logger = logging.getLogger("kellyloop.levy")

__all__ = [
    "DENOMINATOR_FLOOR",
    "LevyModel",
    "Sensitivity",
    "brownian_model",
    "get_model",
    "glm_leverage_sensitivity",
    "glm_log_utility_expansion",
    "glm_optimal_leverage",
    "jump_diffusion_model",
    "list_models",
    "poisson_jump_model",
    "register_model",
]

DENOMINATOR_FLOOR = 1e-14
SENSITIVITY_RTOL = 1e-6

Exponent = Callable[[float], float]
RiskPremium = Callable[[float, float], float]


def _linear_premium(lam: float, sigma: float) -> float:
    return lam * sigma


class LevyModel(BaseModel):
    """A geometric Levy model: exponent ``psi`` and risk premium ``R``."""

    name: str = Field(..., min_length=1, description="Registry identifier")
    psi: Exponent = Field(..., description="Levy exponent sigma -> psi(sigma)")
    risk_premium: RiskPremium = Field(
        default=_linear_premium, description="(lambda, sigma) -> R(lambda, sigma)"
    )
    params: dict[str, float] = Field(
        default_factory=dict, description="Parameters the exponent was built with"
    )

    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _normalized(self) -> LevyModel:
        at_zero = self.psi(0.0)
        if not math.isfinite(at_zero) or abs(at_zero) > DENOMINATOR_FLOOR:
            raise ValueError(f"psi(0) must be 0 for model {self.name!r}, got {at_zero!r}")
        return self

    def convexity(self, sigma: float) -> float:
        """``psi(2*sigma) - 2*psi(sigma)``, the variance term of the expansion."""
        return self.psi(2.0 * sigma) - 2.0 * self.psi(sigma)


# ---- built-in models ------------------------------------------------------ #


def brownian_model() -> LevyModel:
    """GBM: ``psi(s) = s**2/2``; reduces ``L_hat`` to ``lambda/sigma``."""
    return LevyModel(name="brownian", psi=lambda s: 0.5 * s * s)


def poisson_jump_model(m: float = 1.0) -> LevyModel:
    """Compensated unit Poisson jumps of intensity ``m``: ``m*(e**s - 1 - s)``."""
    if not (math.isfinite(m) and m > 0):
        raise ConfigurationException(f"jump intensity m must be positive, got {m!r}")
    return LevyModel(
        name="poisson-jump",
        psi=lambda s: m * math.expm1(s) - m * s,
        params={"m": m},
    )


def jump_diffusion_model(m: float = 1.0) -> LevyModel:
    """Brownian part plus compensated Poisson jumps of intensity ``m``."""
    if not (math.isfinite(m) and m > 0):
        raise ConfigurationException(f"jump intensity m must be positive, got {m!r}")
    return LevyModel(
        name="jump-diffusion",
        psi=lambda s: 0.5 * s * s + m * math.expm1(s) - m * s,
        params={"m": m},
    )


ModelFactory = Callable[..., LevyModel]

_registry: dict[str, ModelFactory] = {
    "brownian": brownian_model,
    "poisson-jump": poisson_jump_model,
    "jump-diffusion": jump_diffusion_model,
}
_registry_lock = Lock()


def register_model(name: str, factory: ModelFactory) -> None:
    """Make ``factory(**params)`` available as ``get_model(name, **params)``."""
    if not callable(factory):
        raise ConfigurationException(f"Model factory must be callable, got {type(factory)}")
    with _registry_lock:
        if name in _registry:
            raise ConfigurationException(f"model {name!r} is already registered")
        _registry[name] = factory


def get_model(name: str, **params: Any) -> LevyModel:
    """Build a registered model by name."""
    with _registry_lock:
        factory = _registry.get(name)
    if factory is None:
        raise ConfigurationException(
            f"unknown model {name!r} (known: {', '.join(list_models())})"
        )
    return factory(**params)


def list_models() -> list[str]:
    with _registry_lock:
        return sorted(_registry)


# ---- leverage ------------------------------------------------------------- #


def glm_optimal_leverage(model: LevyModel, lam: float, sigma: float) -> float:
    """Optimal GLM leverage ``R(lambda, sigma) / (psi(2*sigma) - 2*psi(sigma))``."""
    denominator = model.convexity(sigma)
    if not math.isfinite(denominator) or denominator < DENOMINATOR_FLOOR:
        raise DegenerateExponentError(
            f"model {model.name!r}: psi(2s) - 2psi(s) = {denominator!r} at sigma={sigma!r}"
        )
    return model.risk_premium(lam, sigma) / denominator


def glm_log_utility_expansion(
    model: LevyModel,
    lam: float,
    sigma: float,
    theta_s0: float,
    t: float,
    r: float = 0.0,
) -> float:
    """First-order-in-``t`` expected log wealth for invested fraction ``theta_s0``.

    ``a*R*t + r*t - a**2*(psi(2s) - 2psi(s))*t/2`` with ``a = theta_s0``;
    terms of order ``t**2`` are dropped.
    """
    premium = model.risk_premium(lam, sigma)
    return (
        theta_s0 * premium * t
        + r * t
        - 0.5 * theta_s0 * theta_s0 * model.convexity(sigma) * t
    )


class Sensitivity(BaseModel):
    """A Richardson-extrapolated partial derivative of ``L_hat``."""

    which: Literal["lambda", "sigma"]
    value: float
    coarse: float = Field(description="Estimate at step h")
    fine: float = Field(description="Estimate at step h/2")
    step: float
    confident: bool = Field(description="Coarse and fine agree to 1e-6 relative")

    model_config = ConfigDict(frozen=True, extra="forbid")


def _richardson(f: Callable[[float], float], x: float, h: float) -> float:
    d_h = (f(x + h) - f(x - h)) / (2.0 * h)
    d_half = (f(x + h / 2) - f(x - h / 2)) / h
    return (4.0 * d_half - d_h) / 3.0


def glm_leverage_sensitivity(
    model: LevyModel,
    lam: float,
    sigma: float,
    which: Literal["lambda", "sigma"],
    step: float | None = None,
) -> Sensitivity:
    """Partial derivative of ``L_hat`` with respect to ``lambda`` or ``sigma``.

    Central differences with one Richardson extrapolation, evaluated at steps
    ``h`` and ``h/2``; ``confident`` is False when the two disagree beyond
    1e-6 relative.
    """
    if which == "lambda":
        x = lam

        def f(v: float) -> float:
            return glm_optimal_leverage(model, v, sigma)

    elif which == "sigma":
        x = sigma

        def f(v: float) -> float:
            return glm_optimal_leverage(model, lam, v)

    else:
        raise ConfigurationException(f"which must be 'lambda' or 'sigma', got {which!r}")

    h = step if step is not None else 1e-3 * max(abs(x), 1.0)
    if which == "sigma":
        h = min(h, 0.25 * sigma)
    coarse = _richardson(f, x, h)
    fine = _richardson(f, x, h / 2)
    scale = max(abs(fine), abs(coarse), 1e-300)
    confident = abs(fine - coarse) <= SENSITIVITY_RTOL * scale or fine == coarse
    if not confident:
        logger.warning(
            "sensitivity d/d%s of %s not converged: %r vs %r",
            which,
            model.name,
            coarse,
            fine,
        )
    return Sensitivity(
        which=which, value=fine, coarse=coarse, fine=fine, step=h, confident=confident
    )
