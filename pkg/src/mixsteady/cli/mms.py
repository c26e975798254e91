"""``mixsteady mms``: manufactured-solution convergence study."""
from __future__ import annotations

from typing import Optional

import rich.box
import typer
from rich.table import Table

from mixsteady.cli.common import config_path, console, fail, fmt, out_dir, parse_ints
from mixsteady.core.reports import MmsReport
from mixsteady.errors import MixSteadyError, PreconditionError


def render_mms(report: MmsReport) -> Table:
    table = Table(
        title=f"MMS {report.case} ({report.convection})",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
    )
    table.add_column("Grid", style="cyan")
    table.add_column("h", justify="right")
    table.add_column("Error", justify="right", style="green")
    table.add_column("Order", justify="right")
    for level in report.levels:
        table.add_row(f"{level.nx + 1}x{level.ny + 1}", f"{level.h:.4g}", fmt(level.error), fmt(level.order, ".3f"))
    return table


def mms(
    config: Optional[str] = typer.Option(None, "--config", "-c", help="Problem config (YAML)"),
    case: str = typer.Option(..., "--case", help="thermal, species, flow or coupled"),
    convection: Optional[str] = typer.Option(None, "--convection", help="upwind or centered (default from config)"),
    levels: str = typer.Option("16,32,64,128", "--levels", help="Cells per side, increasing"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Run one MMS case on a refinement sequence and report observed orders."""
    from mixsteady.core.mms import run_mms
    from mixsteady.physics.problem import Problem
    from mixsteady.storage.reports import write_json, write_mms_table

    target = out_dir(out)
    try:
        if convection not in (None, "upwind", "centered"):
            raise PreconditionError(f"unknown convection scheme '{convection}'")
        problem = Problem.from_path(config_path(config))
        report = run_mms(problem, case, parse_ints(levels), convection=convection)
    except MixSteadyError as err:
        fail(err)

    write_mms_table(report, target / f"mms_{report.case}.csv", problem.digest)
    write_json(report, target / f"mms_{report.case}.json")
    console.print(render_mms(report))
    console.print(f"  observed order: [cyan]{fmt(report.observed_order, '.3f')}[/cyan]")
    if report.dual_path_difference is not None:
        console.print(f"  Kirchhoff vs Newton path: {report.dual_path_difference:.3e}")
