"""``mixsteady check``: recompute diagnostics from saved field files."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import rich.box
import typer
from rich.table import Table

from mixsteady.cli.common import config_path, console, fail, fmt
from mixsteady.core.reports import DiagnosticsReport
from mixsteady.errors import MixSteadyError

logger = logging.getLogger(__name__)


def render_diagnostics(diag: DiagnosticsReport) -> Table:
    table = Table(
        title=f"Diagnostics (M = {diag.M:g}, delta = {diag.delta:g})",
        show_header=True,
        header_style="bold magenta",
        box=rich.box.ROUNDED,
    )
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", justify="right", style="green")
    rows = [
        ("sigma_min", diag.sigma_min),
        ("integral of sigma", diag.sigma_integral),
        ("regularization dissipation", diag.regularization_integral),
        ("entropy balance residual", diag.entropy_balance_residual),
        ("total energy residual", diag.total_energy_residual),
        ("Xi", diag.xi),
        ("Xi / M", diag.xi_over_M),
        ("|sum Y - 1|_2", diag.mass_defect_l2),
        ("|sum Y - 1|_{1,2}", diag.mass_defect_w12),
        ("max |integral omega_k|", max((abs(c) for c in diag.compat), default=0.0)),
    ]
    for label, value in rows:
        table.add_row(label, fmt(value))
    return table


def check(
    state: str = typer.Option(..., "--state", help="State directory written by solve"),
    config: Optional[str] = typer.Option(None, "--config", "-c", help="Problem config (YAML)"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Diagnostics JSON to write"),
):
    """Recompute the diagnostics of a saved state from its files alone."""
    from mixsteady.core.diagnostics import diagnose
    from mixsteady.physics.problem import Problem
    from mixsteady.storage.fields import load_state
    from mixsteady.storage.reports import DiagnosticsDocument, diagnostics_match, read_json, write_json

    state_dir = Path(state)
    try:
        problem = Problem.from_path(config_path(config))
        field_state, manifest = load_state(state_dir, problem.grid)
        if manifest.config_sha256 and manifest.config_sha256 != problem.digest:
            logger.warning("state was written with a different config (sha256 %s)", manifest.config_sha256[:12])
        diag = diagnose(field_state, problem, manifest.delta)
        doc = DiagnosticsDocument(
            config_sha256=manifest.config_sha256, M=field_state.M, delta=manifest.delta, diagnostics=diag,
        )
        target = Path(out) if out else state_dir.parent / "check.json"
        write_json(doc, target)

        embedded = state_dir.parent / "diagnostics.json"
        mismatch = None
        if embedded.is_file():
            mismatch = diagnostics_match(read_json(embedded, DiagnosticsDocument).diagnostics, diag)
    except MixSteadyError as err:
        fail(err)

    console.print(render_diagnostics(diag))
    if not embedded.is_file():
        console.print("[yellow]No embedded diagnostics next to the state; nothing to compare[/yellow]")
    elif mismatch is None:
        console.print("[green]Reproduces the embedded diagnostics exactly[/green]")
    else:
        console.print(f"[yellow]Differs from the embedded diagnostics in '{mismatch}'[/yellow]")
    console.print(f"Diagnostics written to [cyan]{target}[/cyan]")
