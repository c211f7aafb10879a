#!/usr/bin/env python3
# /// script
# dependencies = [
#     "kellyloop>=0.1.0",
#     "typer>=0.12.0",
# ]
# ///
"""
Draw the feedback map: the rebalance line against the impact curve, with the
cobweb of the first iterates from ``x0``. Starting inside ``x*`` decays,
starting outside explodes.
"""

from __future__ import annotations

from pathlib import Path

import typer

from kellyloop import FeedbackMap, classify, write_map_svg

app = typer.Typer()


@app.command()
def main(
    out: Path = typer.Option(Path("map.svg"), "--out", "-o"),
    leverage: float = typer.Option(2.0, "--leverage", "-L"),
    gamma: float = typer.Option(0.5, "--gamma"),
    x0: float = typer.Option(0.9, "--x0", help="Initial relative price change"),
    steps: int = typer.Option(20, "--steps"),
) -> None:
    """Write the map/cobweb diagram for one frozen-mode map."""
    fmap = FeedbackMap.frozen(leverage=leverage, gamma=gamma)
    write_map_svg(fmap, x0, out, n_steps=steps)
    label = classify(fmap, x0)
    print(f"phase {label}: {label.description}")
    print(f"written to {out}")


if __name__ == "__main__":
    app()
