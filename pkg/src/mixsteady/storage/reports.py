"""JSON reports, the sweep ledger CSV and the MMS convergence table."""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from mixsteady import __version__
from mixsteady.core.reports import DiagnosticsReport, MmsReport, SweepResult, SweepRow
from mixsteady.errors import SchemaError
from mixsteady.storage.fields import provenance_lines

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
ModelT = TypeVar("ModelT", bound=BaseModel)

ROW_COLUMNS = (
    "axis", "value", "status", "M", "delta", "g_val", "mass_defect_l2", "mass_defect_w12",
    "xi", "xi_over_M", "entropy_balance_residual", "total_energy_residual", "sigma_min",
    "max_abs_compat",
)


class DiagnosticsDocument(BaseModel):
    """Diagnostics of one saved state, with provenance."""

    version: str = __version__
    config_sha256: str = ""
    M: float
    delta: float
    diagnostics: DiagnosticsReport


def write_json(model: BaseModel, path: PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.debug("Wrote %s", p)
    return p


def read_json(path: PathLike, model: Type[ModelT]) -> ModelT:
    p = Path(path)
    if not p.is_file():
        raise SchemaError(f"report not found: {p}")
    try:
        return model.model_validate_json(p.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise SchemaError(f"{p}: not a valid {model.__name__} ({e.error_count()} error(s))") from None


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _ledger_keys(rows: Sequence[SweepRow]) -> List[str]:
    keys: List[str] = []
    for row in rows:
        for key in row.ledger:
            if key not in keys:
                keys.append(key)
    return keys


def write_ledger(result: SweepResult, path: PathLike, digest: str = "") -> Path:
    """One row per sweep value; fits and verdicts as trailing ``# fit`` comment lines."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    keys = _ledger_keys(result.rows)
    with p.open("w", newline="", encoding="utf-8") as fh:
        for line in provenance_lines(digest):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*ROW_COLUMNS, *(f"ledger_{k}" for k in keys)])
        for row in result.rows:
            writer.writerow(
                [_cell(getattr(row, c)) for c in ROW_COLUMNS] + [_cell(row.ledger.get(k)) for k in keys]
            )
        for fit in result.fits:
            fh.write(f"# fit {fit.quantity} vs {fit.against}: slope={_cell(fit.slope)} points={fit.points}\n")
        for key, holds in result.independence.items():
            fh.write(f"# independence {key}: {_cell(holds)} (spread <= 25% of max)\n")
        if result.xi_over_M_decreasing is not None:
            fh.write(f"# xi_over_M strictly decreasing: {result.xi_over_M_decreasing}\n")
        if result.g_val_one is not None:
            fh.write(f"# g_val == 1 at every final state: {result.g_val_one}\n")
    logger.info("Wrote ledger (%d rows) to %s", len(result.rows), p)
    return p


def write_mms_table(report: MmsReport, path: PathLike, digest: str = "") -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="", encoding="utf-8") as fh:
        for line in provenance_lines(digest):
            fh.write(line + "\n")
        fh.write(f"# case {report.case} convection {report.convection}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["nx", "ny", "h", "error", "order"])
        for level in report.levels:
            writer.writerow([level.nx, level.ny, _cell(level.h), _cell(level.error), _cell(level.order)])
        fh.write(f"# observed_order {_cell(report.observed_order)}\n")
        if report.dual_path_difference is not None:
            fh.write(f"# dual_path_difference {_cell(report.dual_path_difference)}\n")
    logger.info("Wrote MMS table to %s", p)
    return p


def diagnostics_match(a: DiagnosticsReport, b: DiagnosticsReport) -> Optional[str]:
    """None if both reports serialize identically, else the first differing field."""
    da, db = json.loads(a.model_dump_json()), json.loads(b.model_dump_json())
    for key in da:
        if da[key] != db.get(key):
            return key
    return None
