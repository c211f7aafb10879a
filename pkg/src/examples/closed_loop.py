#!/usr/bin/env python3
# /// script
# dependencies = [
#     "kellyloop>=0.1.0",
# ]
# ///
"""
Closed loop walk-through: Kelly leverage -> feedback trajectory -> detected
phase -> meta-CTA action, for one starting point on each side of x*.
"""

from __future__ import annotations

from kellyloop import (
    FeedbackMap,
    MarketParams,
    TrajectoryRunner,
    advise,
    classify,
    detect_phase,
    optimal_leverage,
    unstable_fixed_point,
)


class PrintingRunner(TrajectoryRunner):
    """Echo every point of the run."""

    def on_step(self, point):
        print(f"  step {point.step:3d}  x = {point.x: .6e}  dtheta = {point.theta_change: .6e}")

    def on_halt(self, trajectory):
        print(f"  halted: {trajectory.halt_reason}")


def main() -> None:
    params = MarketParams(lam=0.3, sigma=0.15, r=0.0)
    leverage = optimal_leverage(params)
    fmap = FeedbackMap.frozen(leverage=leverage, gamma=0.5)
    x_star = unstable_fixed_point(fmap)
    print(f"Kelly leverage L = {leverage:.4f}, unstable fixed point x* = {x_star:.4f}")

    runner = PrintingRunner()
    for x0 in (0.5 * x_star, 1.5 * x_star):
        print(f"\nx0 = {x0:.4f}")
        trajectory = runner.run(fmap, x0, n_steps=50)
        xs = [x for x in trajectory.xs if abs(x) <= 1e12]
        phase = detect_phase(xs)
        advice = advise(phase)
        print(f"  classify: {classify(fmap, x0)}  detect: {phase}  action: {advice.action}")
        print(f"  {advice.rationale}")


if __name__ == "__main__":
    main()
