"""
Command-line entry point: ``kellyloop leverage|simulate|sweep|option-match|detect``.

Every command is a thin wrapper around one library call. Scalars are printed
as JSON, sequences and grids as CSV, the phase heatmap and the map diagram as
SVG; numbers carry 12 significant digits.

Exit codes: 0 success (including "no solution"), 1 runtime/dynamics error,
2 usage or configuration error.
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import typer
from pydantic import ValidationError

from ._export import (
    dumps_json,
    read_returns,
    write_map_svg,
    write_phase_csv,
    write_phase_svg,
    write_trajectory_csv,
)
from ._runconfig import (
    DetectConfig,
    LeverageConfig,
    OptionMatchConfig,
    SimulateConfig,
    SweepConfig,
    load_config,
)
from .core.kelly import MarketParams, PortfolioState, optimal_leverage
from .core.levy import get_model, glm_optimal_leverage
from .dynamics.atlas import sweep
from .dynamics.impact import FeedbackMap, TrajectoryPoint
from .dynamics.runner import TrajectoryRunner
from .exceptions import (
    ConfigurationException,
    KellyLoopException,
    NoSolutionError,
    UnboundedSolutionError,
)
from .replication import MatchProblem, atm_match, general_match
from .strategy import advise, detect_phase

logger = logging.getLogger("kellyloop.cli")

app = typer.Typer(
    name="kellyloop",
    help="Kelly leverage, impact feedback maps, phase diagrams and option matching.",
    no_args_is_help=True,
    add_completion=False,
)

ConfigOption = typer.Option(
    None, "--config", help="JSON file with parameters; flags override it"
)


class _EchoHandler(logging.Handler):
    """Writes log records to the current stderr at emit time."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            typer.echo(self.format(record), err=True)
        except Exception:
            self.handleError(record)


_handler = _EchoHandler()
_handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG to stderr"),
) -> None:
    """Kelly-optimizer / price-impact feedback model."""
    root = logging.getLogger("kellyloop")
    if _handler not in root.handlers:
        root.addHandler(_handler)
    _handler.setLevel(logging.DEBUG if verbose else logging.WARNING)
    if verbose:
        root.setLevel(logging.DEBUG)


@contextmanager
def _cli_errors() -> Iterator[None]:
    """Map library failures onto exit codes (2 usage/config, 1 runtime)."""
    try:
        yield
    except ValidationError as exc:
        typer.echo(f"error: invalid parameters\n{exc}", err=True)
        raise typer.Exit(code=2) from exc
    except ConfigurationException as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(code=2) from exc
    except KellyLoopException as exc:
        typer.echo(f"error: {exc}", err=True)
        raise typer.Exit(code=1) from exc


def _emit_json(payload: Any) -> None:
    typer.echo(dumps_json(payload))


# ---- leverage ----------------------------------------------------------- #


@app.command("leverage")
def cmd_leverage(
    lam: float | None = typer.Option(None, "--lambda", help="Market price of risk"),
    sigma: float | None = typer.Option(None, "--sigma", help="Volatility (> 0)"),
    r: float | None = typer.Option(None, "--r", help="Short rate"),
    model: str | None = typer.Option(
        None, "--model", help="Levy model (brownian, poisson-jump, jump-diffusion)"
    ),
    m: float | None = typer.Option(None, "--m", help="Jump intensity of the Levy model"),
    config: Path | None = ConfigOption,
) -> None:
    """Kelly leverage: lambda/sigma (GBM) or the GLM ratio for --model."""
    with _cli_errors():
        cfg = load_config(
            LeverageConfig, config, lam=lam, sigma=sigma, r=r, model=model, m=m
        )
        if cfg.model is None:
            params = MarketParams(lam=cfg.lam, sigma=cfg.sigma, r=cfg.r)
            _emit_json({"leverage": optimal_leverage(params)})
            return
        try:
            levy = get_model(cfg.model, **({"m": cfg.m} if cfg.m is not None else {}))
        except TypeError as exc:
            raise ConfigurationException(
                f"model {cfg.model!r} does not take these parameters: {exc}"
            ) from exc
        _emit_json(
            {
                "leverage": glm_optimal_leverage(levy, cfg.lam, cfg.sigma),
                "model": levy.name,
            }
        )


# ---- simulate ----------------------------------------------------------- #


@app.command("simulate")
def cmd_simulate(
    leverage: float | None = typer.Option(None, "--leverage", "-L", help="Leverage ratio"),
    gamma: float | None = typer.Option(None, "--gamma", help="Impact exponent"),
    rebalance_scale: float | None = typer.Option(
        None, "--scale", "-A", help="Frozen rebalance prefactor A"
    ),
    kappa: float | None = typer.Option(None, "--kappa", help="Impact coefficient"),
    x0: float | None = typer.Option(None, "--x0", help="Initial relative price change"),
    steps: int | None = typer.Option(None, "--steps", "-n", help="Maximum points"),
    mode: str | None = typer.Option(None, "--mode", help="frozen or full"),
    sigma: float | None = typer.Option(None, "--sigma", help="Volatility (full mode)"),
    r: float | None = typer.Option(None, "--r", help="Short rate (full mode)"),
    dt: float | None = typer.Option(None, "--dt", help="Rebalance interval (full mode)"),
    S: float | None = typer.Option(None, "--S", help="Initial price"),
    V: float | None = typer.Option(None, "--V", help="Initial portfolio value"),
    output: Path | None = typer.Option(None, "--output", "-o", help="CSV path (default stdout)"),
    svg: Path | None = typer.Option(
        None, "--svg", help="Also write the map/cobweb diagram SVG (frozen mode)"
    ),
    config: Path | None = ConfigOption,
) -> None:
    """Iterate the feedback map and write the trajectory CSV."""
    with _cli_errors():
        cfg = load_config(
            SimulateConfig,
            config,
            leverage=leverage,
            gamma=gamma,
            rebalance_scale=rebalance_scale,
            kappa=kappa,
            x0=x0,
            steps=steps,
            mode=mode,
            sigma=sigma,
            r=r,
            dt=dt,
            S=S,
            V=V,
            output=output,
            svg=svg,
        )
        if cfg.svg is not None and cfg.mode != "frozen":
            raise ConfigurationException("--svg draws the frozen-mode map only")
        if cfg.mode == "full":
            market = MarketParams(lam=cfg.leverage * cfg.sigma, sigma=cfg.sigma, r=cfg.r)
            fmap = FeedbackMap.full(market, gamma=cfg.gamma, kappa=cfg.kappa, dt=cfg.dt)
        else:
            fmap = FeedbackMap.frozen(
                leverage=cfg.leverage,
                gamma=cfg.gamma,
                rebalance_scale=cfg.rebalance_scale,
                kappa=cfg.kappa,
            )
        L = fmap.leverage
        state = PortfolioState(
            theta=L * cfg.V / cfg.S, phi=(1.0 - L) * cfg.V, S=cfg.S, B=1.0, V=cfg.V
        )

        runner = TrajectoryRunner()

        def log_point(point: TrajectoryPoint) -> None:
            logger.debug("step %d: x=%r dtheta=%r", point.step, point.x, point.theta_change)

        runner.register_hook("on_step", log_point)
        trajectory = runner.run(fmap, cfg.x0, cfg.steps, initial_state=state)
        write_trajectory_csv(trajectory, cfg.output or sys.stdout)
        if cfg.svg is not None:
            write_map_svg(fmap, cfg.x0, cfg.svg, n_steps=cfg.steps)


# ---- sweep -------------------------------------------------------------- #


@app.command("sweep")
def cmd_sweep(
    lambda_min: float | None = typer.Option(None, "--lambda-min"),
    lambda_max: float | None = typer.Option(None, "--lambda-max"),
    gamma_min: float | None = typer.Option(None, "--gamma-min"),
    gamma_max: float | None = typer.Option(None, "--gamma-max"),
    resolution: int | None = typer.Option(None, "--resolution", help="Nodes per axis"),
    x0: float | None = typer.Option(None, "--x0", help="Initial relative price change"),
    rebalance_scale: float | None = typer.Option(None, "--scale", "-A"),
    kappa: float | None = typer.Option(None, "--kappa"),
    workers: int | None = typer.Option(None, "--workers", help="Sweep threads"),
    output: Path | None = typer.Option(None, "--output", "-o", help="CSV path (default stdout)"),
    svg: Path | None = typer.Option(None, "--svg", help="Also write the heatmap SVG"),
    config: Path | None = ConfigOption,
) -> None:
    """Phase diagram over (leverage, gamma): CSV and optional SVG."""
    with _cli_errors():
        cfg = load_config(
            SweepConfig,
            config,
            lambda_min=lambda_min,
            lambda_max=lambda_max,
            gamma_min=gamma_min,
            gamma_max=gamma_max,
            resolution=resolution,
            x0=x0,
            rebalance_scale=rebalance_scale,
            kappa=kappa,
            workers=workers,
            output=output,
            svg=svg,
        )
        grid = sweep(
            (cfg.lambda_min, cfg.lambda_max),
            (cfg.gamma_min, cfg.gamma_max),
            cfg.x0,
            rebalance_scale=cfg.rebalance_scale,
            kappa=cfg.kappa,
            resolution=cfg.resolution,
            max_workers=cfg.workers,
        )
        write_phase_csv(grid, cfg.output or sys.stdout)
        if cfg.svg is not None:
            write_phase_svg(grid, cfg.svg)


# ---- option-match ------------------------------------------------------- #


@app.command("option-match")
def cmd_option_match(
    lam: float | None = typer.Option(None, "--lambda", help="Market price of risk"),
    sigma: float | None = typer.Option(None, "--sigma", help="Volatility (> 0)"),
    atm: bool | None = typer.Option(
        None, "--atm/--general", help="At-the-money zero-rate closed form"
    ),
    S: float | None = typer.Option(None, "--S", help="Spot"),
    r: float | None = typer.Option(None, "--r", help="Short rate"),
    strike: float | None = typer.Option(None, "--strike", help="Pin the strike"),
    tau: float | None = typer.Option(None, "--tau", help="Pin the maturity"),
    config: Path | None = ConfigOption,
) -> None:
    """Call whose replication weights equal the Kelly weights, as JSON."""
    with _cli_errors():
        cfg = load_config(
            OptionMatchConfig,
            config,
            lam=lam,
            sigma=sigma,
            atm=atm,
            S=S,
            r=r,
            strike=strike,
            tau=tau,
        )
        if cfg.atm:
            try:
                atm_solution = atm_match(cfg.lam, cfg.sigma)
            except UnboundedSolutionError:
                _emit_json({"solution": None, "reason": "unbounded"})
                return
            except NoSolutionError:
                _emit_json({"solution": None})
                return
            _emit_json(
                {
                    "solution": {
                        **atm_solution.model_dump(),
                        "K": cfg.S,
                        "nd1": atm_solution.target_nd1,
                        "nd2": 1.0 - atm_solution.target_nd1,
                    }
                }
            )
            return

        problem = MatchProblem(
            S=cfg.S,
            sigma=cfg.sigma,
            r=cfg.r,
            lam=cfg.lam,
            strike=cfg.strike,
            tau=cfg.tau,
        )
        solution = general_match(problem)
        if solution is None:
            _emit_json({"solution": None})
            return
        _emit_json(
            {
                "solution": {
                    "K": solution.K,
                    "tau": solution.tau,
                    "nd1": solution.nd1,
                    "nd2": solution.nd2,
                    "price": solution.price,
                    "residuals": [solution.residual_stock, solution.residual_bond],
                }
            }
        )


# ---- detect ------------------------------------------------------------- #


@app.command("detect")
def cmd_detect(
    source: str | None = typer.Option(
        None, "--input", "-i", help="CSV of returns; '-' reads stdin"
    ),
    column: str | None = typer.Option(None, "--column", help="Column holding returns"),
    min_len: int | None = typer.Option(None, "--min-len", help="Minimum sequence length"),
    config: Path | None = ConfigOption,
) -> None:
    """Detect the phase of a return sequence and print ``phase,action``."""
    with _cli_errors():
        cfg = load_config(
            DetectConfig, config, input=source, column=column, min_len=min_len
        )
        returns = read_returns(
            sys.stdin if cfg.input == "-" else Path(cfg.input), column=cfg.column
        )
        phase = detect_phase(returns, min_len=cfg.min_len)
        advice = advise(phase)
        typer.echo(f"{phase if phase is not None else 'inconclusive'},{advice.action}")


if __name__ == "__main__":
    app()
