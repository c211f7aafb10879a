#!/usr/bin/env python3
# /// script
# dependencies = [
#     "kellyloop>=0.1.0",
#     "typer>=0.12.0",
# ]
# ///
"""
Reproduce the three-phase diagram: sweep leverage and impact exponent for a
fixed initial price change and write the grid as CSV and SVG.
"""

from __future__ import annotations

from pathlib import Path

import typer

from kellyloop import PhaseLabel, sweep, write_phase_csv, write_phase_svg

app = typer.Typer()


@app.command()
def main(
    out_dir: Path = typer.Option(Path("phase-diagram"), "--out-dir", "-o"),
    x0: float = typer.Option(0.01, "--x0", help="Initial relative price change"),
    resolution: int = typer.Option(41, "--resolution", help="Nodes per axis"),
) -> None:
    """Sweep L in [0, 3] and gamma in [0.3, 0.9]."""
    grid = sweep((0.0, 3.0), (0.3, 0.9), x0, resolution=resolution)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_phase_csv(grid, out_dir / "phases.csv")
    write_phase_svg(grid, out_dir / "phases.svg")

    for label, count in grid.counts().items():
        if count:
            print(f"{label:>10}  {count:5d}  {PhaseLabel(label).description}")
    print(f"written to {out_dir}/phases.csv and {out_dir}/phases.svg")


if __name__ == "__main__":
    app()
