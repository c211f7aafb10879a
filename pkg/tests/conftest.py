"""Shared pytest fixtures (pure numerics; no files outside tmp_path)."""

from __future__ import annotations

import pytest

from kellyloop import FeedbackMap, MarketParams


@pytest.fixture
def sqrt_map():
    """Frozen square-root impact map factory with A = kappa = 1."""

    def make(leverage: float, gamma: float = 0.5) -> FeedbackMap:
        return FeedbackMap.frozen(leverage=leverage, gamma=gamma)

    return make


@pytest.fixture
def reference_market():
    """lambda = 0.2, sigma = 0.4: Kelly leverage 0.5."""
    return MarketParams(lam=0.2, sigma=0.4)
