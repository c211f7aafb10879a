"""kellyloop._export
====================
The export seam: the only module that talks to pandas (CSV) and matplotlib
(SVG). Everything leaving the library as a file goes through here.

Determinism contract:

* numbers are written with 12 significant digits (``%.12g``);
* CSV rows follow a fixed order (trajectories by step; phase grids with
  gamma outer and lambda inner);
* SVG output pins matplotlib's hash salt, drops the date metadata and keeps
  text as ``<text>`` elements, so identical inputs give identical bytes.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import IO, TYPE_CHECKING, Any

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.colors import BoundaryNorm, ListedColormap
from matplotlib.figure import Figure
from matplotlib.patches import Patch

from .dynamics.atlas import PhaseGrid, PhaseLabel
from .dynamics.impact import FeedbackMap, unstable_fixed_point
from .dynamics.runner import simulate
from .exceptions import ConfigurationException, DegenerateExponentError

if TYPE_CHECKING:
    from .dynamics.runner import Trajectory

__all__ = [
    "FLOAT_FORMAT",
    "PHASE_COLORS",
    "dumps_json",
    "phase_frame",
    "read_returns",
    "render_map_svg",
    "render_phase_svg",
    "round_sig",
    "trajectory_frame",
    "write_map_svg",
    "write_phase_csv",
    "write_phase_svg",
    "write_trajectory_csv",
]

FLOAT_FORMAT = "%.12g"
TRAJECTORY_COLUMNS = ["step", "x", "dtheta", "S", "V", "halt_reason"]
PHASE_COLUMNS = ["lambda", "gamma", "phase"]

PHASE_COLORS: dict[PhaseLabel, str] = {
    PhaseLabel.I: "#4c72b0",
    PhaseLabel.II: "#55a868",
    PhaseLabel.III: "#c44e52",
    PhaseLabel.IV: "#8172b2",
    PhaseLabel.DEGENERATE: "#8c8c8c",
}
_PHASE_ORDER = list(PhaseLabel)
_SVG_RC = {"svg.hashsalt": "kellyloop", "svg.fonttype": "none"}

Target = str | Path | IO[str]


def round_sig(value: float) -> float:
    """Round to 12 significant digits (non-finite values pass through)."""
    if not math.isfinite(value):
        return value
    return float(FLOAT_FORMAT % value)


def dumps_json(payload: Any) -> str:
    """Compact JSON with every float rounded to 12 significant digits."""

    def convert(obj: Any) -> Any:
        if isinstance(obj, bool) or obj is None:
            return obj
        if isinstance(obj, float):
            return round_sig(obj)
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        if isinstance(obj, list | tuple):
            return [convert(v) for v in obj]
        return obj

    return json.dumps(convert(payload), separators=(",", ":"))


# ---- trajectories -------------------------------------------------------- #


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    """One row per point; ``halt_reason`` is set on the final row only."""
    last = len(trajectory.points) - 1
    rows = [
        {
            "step": p.step,
            "x": p.x,
            "dtheta": p.theta_change,
            "S": p.S,
            "V": p.V,
            "halt_reason": trajectory.halt_reason if i == last else "",
        }
        for i, p in enumerate(trajectory.points)
    ]
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


def write_trajectory_csv(trajectory: Trajectory, target: Target) -> None:
    trajectory_frame(trajectory).to_csv(
        target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )


# ---- phase grids --------------------------------------------------------- #


def phase_frame(grid: PhaseGrid) -> pd.DataFrame:
    return pd.DataFrame(
        [(lam, gamma, str(label)) for lam, gamma, label in grid.cells()],
        columns=PHASE_COLUMNS,
    )


def write_phase_csv(grid: PhaseGrid, target: Target) -> None:
    phase_frame(grid).to_csv(
        target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )


def _edges(axis: tuple[float, ...]) -> np.ndarray:
    """Cell edges around each node: midpoints inside, half a step outside."""
    values = np.asarray(axis, dtype=float)
    if values.size == 1:
        return np.array([values[0] - 0.5, values[0] + 0.5])
    mid = (values[:-1] + values[1:]) / 2.0
    first = values[0] - (mid[0] - values[0])
    last = values[-1] + (values[-1] - mid[-1])
    return np.concatenate([[first], mid, [last]])


def render_phase_svg(grid: PhaseGrid) -> bytes:
    """Heatmap of the grid, one filled cell per node, fixed five-color legend."""
    codes = np.array(
        [[_PHASE_ORDER.index(label) for label in row] for row in grid.labels],
        dtype=float,
    )
    cmap = ListedColormap([PHASE_COLORS[label] for label in _PHASE_ORDER])
    norm = BoundaryNorm(np.arange(len(_PHASE_ORDER) + 1) - 0.5, cmap.N)

    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(7.0, 5.0))
        ax = fig.add_subplot()
        ax.pcolormesh(
            _edges(grid.lambda_axis),
            _edges(grid.gamma_axis),
            codes,
            cmap=cmap,
            norm=norm,
            shading="flat",
        )
        ax.set_xlabel("leverage ratio Λ")
        ax.set_ylabel("impact exponent γ")
        ax.set_title(f"Phase diagram, x0 = {FLOAT_FORMAT % grid.x0}")
        handles = [
            Patch(facecolor=PHASE_COLORS[label], label=f"{label}: {label.description}")
            for label in _PHASE_ORDER
        ]
        ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.02, 1.0))
        fig.subplots_adjust(right=0.68)
        return _svg_bytes(fig)


def write_phase_svg(grid: PhaseGrid, path: str | Path) -> None:
    Path(path).write_bytes(render_phase_svg(grid))


def _svg_bytes(fig: Figure) -> bytes:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


# ---- map diagram --------------------------------------------------------- #


def _magnitudes(xs: list[float]) -> list[float]:
    out: list[float] = []
    for x in xs:
        if not math.isfinite(x):
            break
        out.append(abs(x))
    return out


def render_map_svg(fmap: FeedbackMap, x0: float, n_steps: int = 20) -> bytes:
    """Rebalance line against impact curve, with the cobweb of the first iterates.

    Drawn in the ``(|x|, |dtheta|)`` plane: the rebalance relation is the line
    ``A*|L - 1|*|x|``, the impact relation the curve ``kappa*|x|**gamma``.
    They cross at the origin and at ``x*``. Frozen mode only.
    """
    if fmap.mode != "frozen":
        raise ConfigurationException("the map diagram needs a frozen-mode map")
    gain = fmap.scale() * abs(fmap.leverage - 1.0)
    try:
        x_star = unstable_fixed_point(fmap)
    except DegenerateExponentError:
        x_star = None
    if x_star is not None and not math.isfinite(x_star):
        x_star = None

    mags = _magnitudes(simulate(fmap, x0, n_steps).xs)
    reach = max([mags[0] if mags else 0.0] + ([x_star] if x_star is not None else []))
    x_max = 1.6 * reach if reach > 0 else 1.0
    y_max = 1.05 * max(gain * x_max, fmap.kappa * x_max**fmap.gamma)
    if y_max == 0.0:
        y_max = 1.0

    web_x: list[float] = []
    web_y: list[float] = []
    if mags:
        web_x, web_y = [mags[0]], [0.0]
    for a, b in zip(mags, mags[1:], strict=False):
        web_x += [a, b]
        web_y += [gain * a, gain * a]

    if fmap.gamma < 1.0:
        origin_note, star_note = "stable", "unstable"
    elif fmap.gamma > 1.0:
        origin_note, star_note = "unstable", "attracting"
    else:
        origin_note, star_note = "neutral", ""

    grid = np.linspace(0.0, x_max, 401)
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(6.0, 5.0))
        ax = fig.add_subplot()
        ax.plot(grid, gain * grid, color="#4c72b0", label="rebalance A|Λ−1||x|")
        ax.plot(
            grid, fmap.kappa * grid**fmap.gamma, color="#c44e52", label="impact κ|x|^γ"
        )
        if web_x:
            ax.plot(web_x, web_y, color="#55a868", linewidth=0.9, label="cobweb")
        ax.plot([0.0], [0.0], "o", color="black", label=f"origin ({origin_note})")
        if x_star is not None:
            ax.plot(
                [x_star],
                [gain * x_star],
                "o",
                color="black",
                markerfacecolor="white",
                label=f"x* = {FLOAT_FORMAT % x_star} ({star_note})",
            )
        ax.set_xlim(0.0, x_max)
        ax.set_ylim(0.0, y_max)
        ax.set_xlabel("relative price change |x|")
        ax.set_ylabel("shares traded |Δθ|")
        ax.set_title(
            f"Λ = {FLOAT_FORMAT % fmap.leverage}, γ = {FLOAT_FORMAT % fmap.gamma}, "
            f"x0 = {FLOAT_FORMAT % x0}"
        )
        ax.legend(loc="upper left")
        return _svg_bytes(fig)


def write_map_svg(
    fmap: FeedbackMap, x0: float, path: str | Path, n_steps: int = 20
) -> None:
    Path(path).write_bytes(render_map_svg(fmap, x0, n_steps))


# ---- returns input ------------------------------------------------------- #


def read_returns(source: str | Path | IO[str], column: str = "x") -> list[float]:
    """Read one column of relative price changes from CSV.

    Uses ``column`` when the header has it (e.g. piped ``simulate`` output);
    a single unnamed column is also accepted, with or without a header.
    """
    try:
        frame = pd.read_csv(source, header=None, dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        return []
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ConfigurationException(f"cannot parse returns CSV: {exc}") from exc
    if frame.empty:
        return []
    header = [str(v).strip() for v in frame.iloc[0]]
    if column in header:
        values = frame.iloc[1:, header.index(column)]
    elif frame.shape[1] == 1:
        values = frame.iloc[:, 0]
        if not _is_number(values.iloc[0]):
            values = values.iloc[1:]
    else:
        raise ConfigurationException(
            f"returns CSV has no column {column!r} (columns: {', '.join(header)})"
        )
    try:
        return [float(v) for v in values.dropna()]
    except ValueError as exc:
        raise ConfigurationException(f"non-numeric return in CSV: {exc}") from exc


def _is_number(text: Any) -> bool:
    try:
        float(text)
    except (TypeError, ValueError):
        return False
    return True
