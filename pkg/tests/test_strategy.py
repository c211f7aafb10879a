"""Meta-CTA detection and advice."""

from __future__ import annotations

import numpy as np
import pytest

from kellyloop import (
    Action,
    FeedbackMap,
    PhaseLabel,
    advise,
    classify,
    detect_phase,
    simulate,
    unstable_fixed_point,
)
from kellyloop.dynamics.impact import BLOWUP
from kellyloop.strategy import DEFAULT_MIN_LEN


def _finite_prefix(xs):
    return [x for x in xs if abs(x) <= BLOWUP]


# ---- advise -------------------------------------------------------------- #


@pytest.mark.parametrize(
    "phase,action",
    [
        (PhaseLabel.III, Action.REDUCE_EXPOSURE_OR_CONTRARIAN),
        (PhaseLabel.II, Action.SELL_GAMMA),
        (PhaseLabel.I, Action.NO_DIRECTIONAL_EDGE),
        (PhaseLabel.IV, Action.NONE),
        (PhaseLabel.DEGENERATE, Action.NONE),
        (None, Action.NONE),
    ],
)
def test_advice_table(phase, action):
    advice = advise(phase)
    assert advice.action == action
    assert advice.phase == phase
    assert advice.rationale


# ---- detect_phase -------------------------------------------------------- #


def test_detects_decay_from_simulation(sqrt_map):
    xs = simulate(sqrt_map(2.0), 0.5, 100).xs
    assert detect_phase(xs) == PhaseLabel.II


def test_default_window_fits_reference_decay(sqrt_map):
    xs = simulate(sqrt_map(2.0), 0.5, 100).xs
    assert len(xs) == 7
    assert DEFAULT_MIN_LEN == 6
    assert detect_phase(xs) == PhaseLabel.II
    assert detect_phase(xs, min_len=8) is None


def test_detects_explosion_before_blowup(sqrt_map):
    xs = _finite_prefix(simulate(sqrt_map(2.0), 2.0, 100).xs)
    assert len(xs) == 6
    assert detect_phase(xs) == PhaseLabel.III


def test_detects_oscillations():
    assert detect_phase([0.4, -0.2, 0.1, -0.05, 0.02, -0.01]) == PhaseLabel.I
    assert detect_phase([0.01, -0.02, 0.04, -0.08, 0.16, -0.32]) == PhaseLabel.IV


def test_alternating_but_not_monotone_is_inconclusive():
    assert detect_phase([0.01, -0.02, 0.01, -0.02]) is None
    assert detect_phase([0.01, -0.02, 0.01, -0.02], min_len=2) is None


@pytest.mark.parametrize(
    "returns",
    [
        [0.1, 0.05],
        [0.5, 0.25, 0.0, 0.1, 0.05, 0.01],
        [0.5, 0.25, float("nan"), 0.1, 0.05, 0.01],
        [0.5, 0.25, -0.1, 0.05, 0.02, 0.01],
        [0.5, 0.25, 0.25, 0.1, 0.05, 0.01],
    ],
)
def test_inconclusive(returns):
    assert detect_phase(returns) is None


def test_min_len_is_configurable():
    assert detect_phase([0.3, 0.2, 0.1], min_len=3) == PhaseLabel.II
    assert detect_phase([0.3, 0.2, 0.1]) is None


def test_detection_round_trip_with_classify():
    rng = np.random.default_rng(7)
    for _ in range(100):
        oscillating = bool(rng.integers(0, 2))
        L = float(rng.uniform(0.0, 0.8) if oscillating else rng.uniform(1.5, 3.0))
        gamma = float(rng.uniform(0.5, 0.9))
        fmap = FeedbackMap.frozen(leverage=L, gamma=gamma)
        x_star = unstable_fixed_point(fmap)
        assert x_star is not None
        ratio = float(rng.uniform(0.7, 0.95) if rng.integers(0, 2) else rng.uniform(1.05, 1.5))
        x0 = float(rng.choice([-1.0, 1.0])) * ratio * x_star
        xs = _finite_prefix(simulate(fmap, x0, 60).xs)
        detected = detect_phase(xs, min_len=4)
        assert detected is not None, (L, gamma, x0)
        assert detected == classify(fmap, x0)
