"""``mixsteady solve``: run the construction and write fields and reports."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import rich.box
import typer
from rich.table import Table

from mixsteady.cli.common import config_path, console, fail, fmt, out_dir
from mixsteady.core.reports import ConstructionReport
from mixsteady.errors import MixSteadyError

logger = logging.getLogger(__name__)


def render_construction(report: ConstructionReport) -> Table:
    """One row per delta: lambda steps, fixed-point iterations, g, mass defect, sigma_min."""
    table = Table(
        title=f"Construction (M = {report.M:g})",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
    )
    table.add_column("delta", style="cyan", justify="right")
    table.add_column("epsilon", justify="right")
    table.add_column("lambda steps", justify="right")
    table.add_column("FP iterations", justify="right")
    table.add_column("g_val", justify="right")
    table.add_column("|sum Y - 1|_2", justify="right", style="green")
    table.add_column("sigma_min", justify="right")

    deltas = sorted({s.delta for s in report.stages}, reverse=True)
    for delta in deltas:
        stages = [s for s in report.stages if s.delta == delta]
        last = stages[-1]
        diag = last.diagnostics
        table.add_row(
            f"{delta:.3g}",
            f"{last.epsilon:.3g}",
            str(len(stages)),
            str(sum(s.iterations for s in stages)),
            f"{last.g_val:.4g}",
            fmt(diag.mass_defect_l2 if diag else None),
            fmt(diag.sigma_min if diag else None),
        )
    return table


def solve(
    config: Optional[str] = typer.Option(None, "--config", "-c", help="Problem config (YAML)"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output directory"),
):
    """Run the homotopy construction and write fields, diagnostics and the report."""
    from mixsteady.core.homotopy import run_construction
    from mixsteady.physics.problem import Problem
    from mixsteady.storage.fields import write_state
    from mixsteady.storage.reports import DiagnosticsDocument, write_json

    target = out_dir(out)
    try:
        problem = Problem.from_path(config_path(config))
        try:
            state, report = run_construction(problem)
        except MixSteadyError as err:
            if isinstance(err.report, ConstructionReport):
                write_json(err.report, target / "report.json")
                console.print(render_construction(err.report))
            raise

        final = report.stages[-1]
        write_state(state, problem.grid, target / "state", final.delta, problem.digest)
        doc = DiagnosticsDocument(
            config_sha256=problem.digest, M=state.M, delta=final.delta, diagnostics=final.diagnostics,
        )
        write_json(doc, target / "diagnostics.json")
        write_json(report, target / "report.json")
    except MixSteadyError as err:
        fail(err)

    console.print(render_construction(report))
    console.print(f"[green]Construction complete[/green], outputs in [cyan]{Path(target)}[/cyan]")
