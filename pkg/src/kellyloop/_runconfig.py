"""kellyloop._runconfig
=======================
Per-command run configuration for the CLI.

Values come from an optional JSON file and are overridden by every flag the
user actually passed. Each model validates the module preconditions before
anything is dispatched.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import ConfigurationException
from .strategy import DEFAULT_MIN_LEN

__all__ = [
    "DetectConfig",
    "LeverageConfig",
    "OptionMatchConfig",
    "SimulateConfig",
    "SweepConfig",
    "load_config",
]


class _RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True, frozen=True)


class LeverageConfig(_RunConfig):
    lam: float = Field(alias="lambda", allow_inf_nan=False)
    sigma: float = Field(gt=0, allow_inf_nan=False)
    r: float = Field(default=0.0, allow_inf_nan=False)
    model: str | None = Field(default=None, description="Levy model name; None = GBM")
    m: float | None = Field(default=None, gt=0, allow_inf_nan=False, description="Jump intensity")


class SimulateConfig(_RunConfig):
    leverage: float = Field(default=2.0, allow_inf_nan=False)
    gamma: float = Field(default=0.5, gt=0, allow_inf_nan=False)
    rebalance_scale: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    kappa: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    x0: float = Field(default=0.5, allow_inf_nan=False)
    steps: int = Field(default=100, ge=1)
    mode: Literal["frozen", "full"] = "frozen"
    sigma: float = Field(default=0.2, gt=0, allow_inf_nan=False, description="Full mode volatility")
    r: float = Field(default=0.0, allow_inf_nan=False)
    dt: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    S: float = Field(default=1.0, gt=0, allow_inf_nan=False, description="Initial price")
    V: float = Field(default=1.0, allow_inf_nan=False, description="Initial value")
    output: Path | None = None
    svg: Path | None = None


class SweepConfig(_RunConfig):
    lambda_min: float = Field(default=0.0, allow_inf_nan=False)
    lambda_max: float = Field(default=3.0, allow_inf_nan=False)
    gamma_min: float = Field(default=0.3, gt=0, allow_inf_nan=False)
    gamma_max: float = Field(default=0.9, gt=0, allow_inf_nan=False)
    resolution: int = Field(default=41, ge=2)
    x0: float = Field(default=0.01, allow_inf_nan=False)
    rebalance_scale: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    kappa: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    workers: int | None = Field(default=None, ge=1)
    output: Path | None = None
    svg: Path | None = None

    @model_validator(mode="after")
    def _ranges(self) -> Self:
        if self.lambda_min > self.lambda_max or self.gamma_min > self.gamma_max:
            raise ValueError("range minimum exceeds maximum")
        if self.x0 == 0.0:
            raise ValueError("x0 must be nonzero")
        return self


class OptionMatchConfig(_RunConfig):
    lam: float = Field(alias="lambda", allow_inf_nan=False)
    sigma: float = Field(gt=0, allow_inf_nan=False)
    atm: bool = False
    S: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    r: float = Field(default=0.0, allow_inf_nan=False)
    strike: float | None = Field(default=None, gt=0, allow_inf_nan=False)
    tau: float | None = Field(default=None, gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _pins(self) -> Self:
        if self.strike is not None and self.tau is not None:
            raise ValueError("pin at most one of strike and tau")
        return self


class DetectConfig(_RunConfig):
    input: str = Field(default="-", description="CSV path, '-' for stdin")
    column: str = "x"
    min_len: int = Field(default=DEFAULT_MIN_LEN, ge=2)


def load_config[C: BaseModel](
    model: type[C], config_path: Path | None, **flags: Any
) -> C:
    """Validate ``model`` from a JSON file overlaid with the given flags.

    Flags that are None were not passed and leave the file value in place.
    Raises ConfigurationException for unreadable or malformed files and
    pydantic.ValidationError for out-of-domain values.
    """
    values: dict[str, Any] = {}
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text())
        except OSError as exc:
            raise ConfigurationException(f"cannot read config {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationException(f"malformed JSON in {config_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationException(f"config {config_path} must hold a JSON object")
        values.update(loaded)
    for name, value in flags.items():
        if value is not None:
            values[_field_key(model, name)] = value
    return model.model_validate(values)


def _field_key(model: type[BaseModel], name: str) -> str:
    """Alias of field ``name`` when it has one (e.g. ``lam`` -> ``lambda``)."""
    field = model.model_fields.get(name)
    if field is not None and field.alias:
        return field.alias
    return name
