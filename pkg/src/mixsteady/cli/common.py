"""Helpers shared by the CLI commands."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, NoReturn, Optional

import typer
from rich.console import Console
from rich.markup import escape

from mixsteady.config import get_settings
from mixsteady.errors import MixSteadyError, PreconditionError

logger = logging.getLogger(__name__)

console = Console()


def config_path(config: Optional[str]) -> Path:
    return Path(config or get_settings().MIXSTEADY_CONFIG)


def out_dir(out: Optional[str]) -> Path:
    return Path(out or get_settings().OUTPUT_DIR)


def fail(err: MixSteadyError) -> NoReturn:
    """Print the error and exit with its documented code."""
    console.print(f"[red]{type(err).__name__}: {escape(str(err))}[/red]")
    raise typer.Exit(err.exit_code)


def parse_floats(text: str, what: str = "values") -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise PreconditionError(f"{what} must be a comma-separated list of numbers, got '{text}'") from None
    if not values:
        raise PreconditionError(f"{what} must not be empty")
    return values


def parse_ints(text: str, what: str = "levels") -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise PreconditionError(f"{what} must be a comma-separated list of integers, got '{text}'") from None


def fmt(value: Optional[float], spec: str = ".3e") -> str:
    return "-" if value is None else format(value, spec)
