"""Structured logging setup."""
from __future__ import annotations

import logging

from rich.logging import RichHandler

from mixsteady.errors import PreconditionError


def resolve_level(level: str) -> int:
    value = logging.getLevelName(level.upper())
    if not isinstance(value, int):
        raise PreconditionError(f"unknown log level '{level}'")
    return value


def setup_logging(level: str = "INFO") -> None:
    """Configure logging with Rich handler.

    Markup is off: solver messages carry literal ``[lambda=..., delta=...]``
    stage tags. numpy/scipy warnings are captured into the same handler.
    """
    logging.basicConfig(
        level=resolve_level(level),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, markup=False, show_path=False)],
        force=True,
    )
    logging.captureWarnings(True)
