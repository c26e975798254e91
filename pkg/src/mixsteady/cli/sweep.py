"""``mixsteady sweep``: one construction per value of delta or M."""
from __future__ import annotations

from typing import Optional

import rich.box
import typer
from rich.table import Table

from mixsteady.cli.common import config_path, console, fail, fmt, out_dir, parse_floats
from mixsteady.config import get_settings
from mixsteady.core.reports import SweepResult
from mixsteady.errors import MixSteadyError, PreconditionError


def render_sweep(result: SweepResult) -> Table:
    table = Table(
        title=f"Sweep over {result.axis} ({len(result.rows)} values)",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
    )
    table.add_column(result.axis, style="cyan", justify="right")
    table.add_column("Status")
    table.add_column("g_val", justify="right")
    table.add_column("|sum Y - 1|_2", justify="right", style="green")
    table.add_column("Xi", justify="right")
    table.add_column("Xi/M", justify="right")
    table.add_column("entropy res.", justify="right")
    table.add_column("energy res.", justify="right")
    table.add_column("sigma_min", justify="right")

    for row in result.rows:
        status = "[green]ok[/green]" if row.status == "ok" else f"[red]{row.status}[/red]"
        table.add_row(
            f"{row.value:.4g}",
            status,
            fmt(row.g_val, ".4g"),
            fmt(row.mass_defect_l2),
            fmt(row.xi),
            fmt(row.xi_over_M),
            fmt(row.entropy_balance_residual),
            fmt(row.total_energy_residual),
            fmt(row.sigma_min),
        )
    return table


def sweep(
    config: Optional[str] = typer.Option(None, "--config", "-c", help="Problem config (YAML)"),
    axis: str = typer.Option(..., "--axis", help="Sweep axis: delta or M"),
    values: str = typer.Option(..., "--values", help="Comma-separated values, e.g. 1e-1,1e-2"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Output directory"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (1 = sequential)"),
):
    """Sweep delta (one warm-started chain) or M and write the ledger CSV."""
    from mixsteady.core.sweep import run_sweep
    from mixsteady.physics.problem import Problem
    from mixsteady.storage.reports import write_json, write_ledger

    target = out_dir(out)
    try:
        workers = jobs if jobs is not None else get_settings().JOBS
        if workers < 1:
            raise PreconditionError("--jobs must be >= 1")
        problem = Problem.from_path(config_path(config))
        result = run_sweep(problem, axis, parse_floats(values), jobs=workers)
    except MixSteadyError as err:
        fail(err)

    for index, row in enumerate(result.rows):
        write_json(row, target / "rows" / f"{index:03d}.json")
    write_json(result, target / "sweep.json")
    write_ledger(result, target / "ledger.csv", problem.digest)

    console.print(render_sweep(result))
    for fit in result.fits:
        console.print(f"  slope of {fit.quantity} vs {fit.against}: [cyan]{fmt(fit.slope, '.3f')}[/cyan]")
    for key, holds in result.independence.items():
        console.print(f"  {key} independent of M (<= 25% spread): {holds}")
    if result.xi_over_M_decreasing is not None:
        console.print(f"  Xi/M strictly decreasing: {result.xi_over_M_decreasing}")
    failed = sum(1 for r in result.rows if r.status != "ok")
    if failed:
        console.print(f"[yellow]{failed} row(s) failed[/yellow], ledger in [cyan]{target}[/cyan]")
    else:
        console.print(f"[green]Sweep complete[/green], ledger in [cyan]{target}[/cyan]")
