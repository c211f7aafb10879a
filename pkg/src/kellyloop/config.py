"""kellyloop.config
===================
Global configuration for kellyloop.

Settings are read from the environment **once, at import time**, and snapshot
into the immutable ``kellyloop.settings`` object.

Supported environment variables (documented in the README):

* ``KELLYLOOP_LOG_LEVEL`` / ``LOG_LEVEL``: Python logging level for the
  ``kellyloop`` logger; the prefixed variable wins when both are set
* ``KELLYLOOP_MAX_WORKERS`` / ``MAX_WORKERS``: threads used by phase sweeps;
  ``0`` lets ``concurrent.futures`` pick
* ``KELLYLOOP_SIM_STEPS``: step cap of simulation-based phase
  classification (default 10 000)
"""

from __future__ import annotations

import logging
import os
from typing import Final

from pydantic import BaseModel, Field

__all__ = [
    "KellyLoopSettings",
    "settings",
    "LOG_LEVEL",
    "MAX_WORKERS",
    "SIM_STEPS",
]


class KellyLoopSettings(BaseModel):
    """kellyloop configuration, snapshot at import time."""

    LOG_LEVEL: str = Field(default="INFO", description="Python logging level")
    MAX_WORKERS: int = Field(
        default=0, ge=0, description="Sweep thread count; 0 = executor default"
    )
    SIM_STEPS: int = Field(
        default=10_000, ge=1, description="Step cap for simulated classification"
    )

    model_config = {"extra": "forbid", "frozen": True}


def _read_settings() -> dict[str, str]:
    """Read the documented env vars with backward-compatible aliases."""
    return {
        "LOG_LEVEL": (
            os.getenv("KELLYLOOP_LOG_LEVEL") or os.getenv("LOG_LEVEL") or "INFO"
        ),
        "MAX_WORKERS": (
            os.getenv("KELLYLOOP_MAX_WORKERS") or os.getenv("MAX_WORKERS") or "0"
        ),
        "SIM_STEPS": os.getenv("KELLYLOOP_SIM_STEPS") or "10000",
    }


settings: Final[KellyLoopSettings] = KellyLoopSettings.model_validate(
    _read_settings()
)

LOG_LEVEL: Final[str] = settings.LOG_LEVEL
MAX_WORKERS: Final[int] = settings.MAX_WORKERS
SIM_STEPS: Final[int] = settings.SIM_STEPS

# Make LOG_LEVEL reach the library: configure our own logger at import time.
logging.getLogger("kellyloop").setLevel(LOG_LEVEL)
