"""Runnable kellyloop examples.

uv run python -m examples.phase_diagram --out-dir phase-diagram
uv run python -m examples.map_diagram --x0 0.9 -o map.svg
uv run python -m examples.closed_loop
"""

from __future__ import annotations
