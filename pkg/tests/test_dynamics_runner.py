"""Trajectory runner: halting, hooks, sign law, full-mode conservation."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest

from kellyloop import (
    FeedbackMap,
    MarketParams,
    PortfolioState,
    TrajectoryRunner,
    simulate,
)
from kellyloop.dynamics.runner import halt_reason
from kellyloop.exceptions import (
    ConfigurationException,
    DynamicsBreakdownError,
    InvalidParameterError,
)

# ---- halting ------------------------------------------------------------- #


def test_decay_halts_on_underflow(sqrt_map):
    traj = simulate(sqrt_map(2.0), 0.5, 100)
    assert traj.halt_reason == "underflow"
    assert traj.xs[:4] == pytest.approx([0.5, 0.25, 0.0625, 0.00390625], rel=1e-12)
    assert all(b < a for a, b in zip(traj.xs, traj.xs[1:], strict=False))
    assert all(x > 0 for x in traj.xs)
    assert abs(traj.xs[-1]) < 1e-15


def test_explosion_halts_on_blowup(sqrt_map):
    traj = simulate(sqrt_map(2.0), 2.0, 100)
    assert traj.halt_reason == "blowup"
    assert traj.xs[:4] == pytest.approx([2.0, 4.0, 16.0, 256.0], rel=1e-12)
    assert traj.xs[-1] > 1e12
    assert all(abs(x) <= 1e12 for x in traj.xs[:-1])


def test_under_levered_oscillates_and_decays(sqrt_map):
    xs = simulate(sqrt_map(0.5), 0.5, 100).xs
    assert len(xs) >= 3
    for a, b in zip(xs, xs[1:], strict=False):
        assert a * b < 0
        assert abs(b) < abs(a)


def test_origin_halts_immediately(sqrt_map):
    traj = simulate(sqrt_map(2.0), 0.0, 100)
    assert len(traj) == 1
    assert traj.halt_reason == "fixed_point"


def test_max_steps(sqrt_map):
    traj = simulate(sqrt_map(2.0, gamma=1.0), 0.3, 25)
    assert len(traj) == 25
    assert traj.halt_reason == "max_steps"
    assert set(traj.xs) == {0.3}


def test_frozen_mode_keeps_state(sqrt_map):
    traj = simulate(sqrt_map(2.0), 0.5, 10)
    assert {p.S for p in traj.points} == {1.0}
    assert {p.V for p in traj.points} == {1.0}
    assert len({(p.theta, p.phi, p.B) for p in traj.points}) == 1


@pytest.mark.parametrize(
    "x,expected",
    [(0.0, "fixed_point"), (1e-16, "underflow"), (-2e12, "blowup"), (math.inf, "blowup"), (0.3, None)],
)
def test_halt_reason(x, expected):
    assert halt_reason(x) == expected


def test_invalid_run_arguments(sqrt_map):
    with pytest.raises(InvalidParameterError):
        simulate(sqrt_map(2.0), 0.5, 0)
    with pytest.raises(InvalidParameterError):
        simulate(sqrt_map(2.0), math.nan, 5)


# ---- sign law ------------------------------------------------------------ #


def test_sign_law_random_parameters():
    rng = np.random.default_rng(20240917)
    checked = 0
    for _ in range(1000):
        L = float(rng.uniform(0.0, 3.0))
        if L == 1.0:
            continue
        gamma = float(rng.uniform(0.3, 0.95))
        x0 = float(rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-4, 1))
        xs = simulate(FeedbackMap.frozen(leverage=L, gamma=gamma), x0, 200).xs
        for a, b in zip(xs, xs[1:], strict=False):
            if a == 0.0 or b == 0.0:
                continue
            assert (math.copysign(1, a) == math.copysign(1, b)) == (L > 1.0)
            checked += 1
    assert checked >= 1000


# ---- full mode ----------------------------------------------------------- #


def test_full_mode_self_financing_identity():
    market = MarketParams(lam=0.1, sigma=0.2, r=0.01)
    fmap = FeedbackMap.full(market, gamma=1.0, kappa=0.25 / 0.98, dt=1e-3)
    state = PortfolioState.from_allocation(market, S=1.0, V=1.0)
    traj = simulate(fmap, 0.01, 1000, initial_state=state)
    assert len(traj) == 1000
    assert traj.halt_reason == "max_steps"

    prev = state
    for p in traj.points:
        dS = p.S - prev.S
        dB = p.B - prev.B
        scale = max(abs(p.V), abs(prev.V))
        assert abs((p.V - prev.V) - (prev.theta * dS + prev.phi * dB)) <= 1e-12 * scale
        assert p.theta * p.S + p.phi * p.B == pytest.approx(p.V, rel=1e-12)
        prev = p
    assert traj.points[-1].B > 1.0


def test_full_mode_value_evolves():
    market = MarketParams(lam=0.4, sigma=0.2)
    traj = simulate(FeedbackMap.full(market, gamma=0.5), 0.01, 20)
    assert traj.points[0].V == pytest.approx(1.0 + 2.0 * 0.01)
    assert traj.points[0].S == pytest.approx(1.01)


def test_full_mode_short_book_oscillates():
    market = MarketParams(lam=-0.1, sigma=0.2)
    traj = simulate(FeedbackMap.full(market, gamma=0.5), 0.01, 20)
    xs = traj.xs
    assert len(xs) >= 3
    for a, b in zip(xs, xs[1:], strict=False):
        assert math.copysign(1, a) != math.copysign(1, b)
    for p in traj.points:
        assert math.copysign(1, p.theta_change) == math.copysign(1, (-0.5 - 1.0) * p.x)


def test_full_mode_sign_law_any_leverage():
    rng = np.random.default_rng(7)
    for _ in range(200):
        lam = float(rng.uniform(-0.6, 0.6))
        market = MarketParams(lam=lam, sigma=0.2)
        L = market.leverage
        if L == 1.0 or L == 0.0:
            continue
        x0 = float(rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-4, -2))
        xs = simulate(FeedbackMap.full(market, gamma=0.5), x0, 50).xs
        for a, b in zip(xs, xs[1:], strict=False):
            if a == 0.0 or b == 0.0:
                continue
            assert (math.copysign(1, a) == math.copysign(1, b)) == (L > 1.0)


@pytest.mark.parametrize(
    "lam,gamma,kappa",
    [(0.4, 0.5, 1.0), (0.4, 1.0, 2.0), (-0.1, 0.5, 1.0), (-0.1, 1.0, 0.75)],
)
def test_full_mode_matches_frozen_for_small_moves(lam, gamma, kappa):
    market = MarketParams(lam=lam, sigma=0.2)
    L = market.leverage
    full = simulate(FeedbackMap.full(market, gamma=gamma, kappa=kappa), 1e-6, 10)
    frozen = simulate(
        FeedbackMap.frozen(L, gamma, rebalance_scale=abs(L), kappa=kappa), 1e-6, 10
    )
    n = min(len(full), len(frozen))
    assert n >= 3
    assert full.xs[:n] == pytest.approx(frozen.xs[:n], rel=1e-4)


def test_full_mode_price_crash_raises():
    market = MarketParams(lam=0.1, sigma=0.2)
    with pytest.raises(DynamicsBreakdownError):
        simulate(FeedbackMap.full(market, gamma=0.5), -1.5, 10)


# ---- hooks --------------------------------------------------------------- #


def test_override_hooks_fire(sqrt_map):
    seen = []

    class Recorder(TrajectoryRunner):
        def on_step(self, point):
            seen.append(point.step)

        def on_halt(self, trajectory):
            seen.append(trajectory.halt_reason)

    traj = Recorder().run(sqrt_map(2.0), 0.5, 100)
    assert seen == [*range(len(traj)), "underflow"]


def test_registered_callbacks_fire_after_override(sqrt_map):
    calls = []

    class Runner(TrajectoryRunner):
        def on_step(self, point):
            calls.append(("override", point.step))

    runner = Runner()
    runner.register_hook("on_step", lambda p: calls.append(("callback", p.step)))
    runner.run(sqrt_map(2.0), 0.0, 5)
    assert calls == [("override", 0), ("callback", 0)]


def test_unregister_removes_callback(sqrt_map):
    calls = []

    def cb(point):
        calls.append(point)

    runner = TrajectoryRunner()
    runner.register_hook("on_step", cb)
    runner.unregister_hook("on_step", cb)
    runner.run(sqrt_map(2.0), 0.5, 5)
    assert calls == []


def test_invalid_hook_registration_raises():
    with pytest.raises(ConfigurationException, match="callable"):
        TrajectoryRunner().register_hook("on_step", "not-callable")  # type: ignore[arg-type]


def test_hook_error_does_not_break_run(sqrt_map, caplog):
    def boom(point):
        raise RuntimeError("boom")

    runner = TrajectoryRunner()
    runner.register_hook("on_step", boom)
    with caplog.at_level(logging.ERROR, logger="kellyloop.dynamics"):
        traj = runner.run(sqrt_map(2.0), 0.5, 100)
    assert traj.halt_reason == "underflow"
    assert "boom" in caplog.text
    assert runner.last_hook_error is None


def test_raise_on_hook_error_collects(sqrt_map):
    def boom(point):
        raise RuntimeError("boom")

    runner = TrajectoryRunner(raise_on_hook_error=True)
    runner.register_hook("on_halt", boom)
    runner.run(sqrt_map(2.0), 0.5, 100)
    assert isinstance(runner.last_hook_error, RuntimeError)


def test_trajectory_frame_columns(sqrt_map):
    frame = simulate(sqrt_map(2.0), 0.5, 100).to_frame()
    assert list(frame.columns) == ["step", "x", "dtheta", "S", "V", "halt_reason"]
    assert frame["halt_reason"].iloc[-1] == "underflow"
    assert set(frame["halt_reason"].iloc[:-1]) == {""}
