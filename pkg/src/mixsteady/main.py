"""Main CLI application entry point."""
from __future__ import annotations

from typing import Optional

import rich.box
import typer
from rich.table import Table

from mixsteady.cli import check, mms, solve, sweep
from mixsteady.cli.common import config_path, console, fail
from mixsteady.config import get_settings
from mixsteady.errors import MixSteadyError
from mixsteady.utils.logging import setup_logging

app = typer.Typer(
    name="mixsteady",
    help="Steady reacting-mixture solver: homotopy construction, diagnostics, MMS",
    add_completion=False,
)

app.command("solve")(solve.solve)
app.command("sweep")(sweep.sweep)
app.command("mms")(mms.mms)
app.command("check")(check.check)


@app.callback()
def main_callback(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Log level (default from LOG_LEVEL)"),
):
    """mixsteady command line."""
    try:
        setup_logging(log_level or get_settings().LOG_LEVEL)
    except MixSteadyError as err:
        fail(err)


# ---------------------------------------------------------------------------
# Status command
# ---------------------------------------------------------------------------


@app.command()
def status(
    config: Optional[str] = typer.Option(None, "--config", "-c", help="Problem config (YAML)"),
):
    """Show settings and the loaded problem configuration."""
    from mixsteady.physics.problem import Problem

    settings = get_settings()
    try:
        problem = Problem.from_path(config_path(config))
    except MixSteadyError as err:
        fail(err)

    table = Table(
        title="mixsteady Configuration",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
    )
    table.add_column("Setting", style="cyan")
    table.add_column("Value", style="green")

    params, spec, grid = problem.params, problem.spec, problem.grid
    rows = [
        ("Environment", settings.ENVIRONMENT),
        ("Config", str(config_path(config))),
        ("Config sha256", problem.digest[:16]),
        ("Output dir", settings.OUTPUT_DIR),
        ("Jobs", settings.JOBS),
        ("Grid", f"{grid.Lx:g} x {grid.Ly:g}, {grid.nx} x {grid.ny} cells"),
        ("Species", f"n = {spec.n}, c_v = {spec.c_v}"),
        ("gamma", spec.gamma),
        ("Lambda / B_omega", f"{spec.Lambda:g} / {spec.B_omega:g}"),
        ("f_fric", spec.f_fric),
        ("M (M_min)", f"{params.M:g} ({params.M_min:g})"),
        ("lambda steps", len(params.lambdas)),
        ("delta schedule", ", ".join(f"{d:.3g}" for d in params.delta_schedule)),
        ("Convection", problem.solver.convection),
        ("Log Level", settings.LOG_LEVEL),
    ]
    for label, value in rows:
        table.add_row(label, str(value))

    console.print(table)


# ---------------------------------------------------------------------------
# List command
# ---------------------------------------------------------------------------


@app.command("list")
def list_commands():
    """List all available commands."""
    table = Table(
        title="Available Commands",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
        expand=True,
        show_lines=True,
    )
    table.add_column("Command", style="cyan", width=40)
    table.add_column("Description", style="green", width=50)

    commands = [
        ("solve --config PATH --out DIR", "Run the construction; write fields and reports"),
        ("sweep --axis {delta,M} --values ...", "Sweep delta or M; write the ledger CSV"),
        ("mms --case CASE --levels 16,32,...", "Manufactured-solution convergence table"),
        ("check --state DIR", "Recompute diagnostics from saved fields"),
        ("status", "Show configuration"),
        ("list", "List commands"),
    ]
    for cmd, desc in commands:
        table.add_row(cmd, desc)

    console.print("\n")
    console.print(table)
    console.print("\n")


if __name__ == "__main__":
    app()
