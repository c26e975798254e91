"""Parameter sweeps over delta or M.

A delta sweep is one chained construction whose delta schedule is the list of
values, so every row warm-starts from the previous one. An M sweep runs one
construction per value. With ``jobs > 1`` rows are computed in worker
processes and merged back in input order.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from mixsteady.core.diagnostics import mark_independence
from mixsteady.core.homotopy import run_construction
from mixsteady.core.reports import ConstructionReport, StageRecord, SweepFit, SweepResult, SweepRow
from mixsteady.errors import MixSteadyError, PreconditionError
from mixsteady.physics.models import ProblemConfig
from mixsteady.physics.problem import Problem, update_config

logger = logging.getLogger(__name__)

LEDGER_KEYS = ("apriori1", "xi_r", "xi_u", "xi_theta", "xi_Y", "sigma_y", "sum_flux", "log_theta",
               "eps_log_Y", "delta_Y_log_Y", "inv_theta_boundary", "second_derivatives")


def row_from_stage(axis: str, value: float, record: StageRecord) -> SweepRow:
    diag = record.diagnostics
    row = SweepRow(axis=axis, value=value, delta=record.delta, g_val=record.g_val)
    if diag is None:
        return row
    row.M = diag.M
    row.mass_defect_l2 = diag.mass_defect_l2
    row.mass_defect_w12 = diag.mass_defect_w12
    row.xi = diag.xi
    row.xi_over_M = diag.xi_over_M
    row.entropy_balance_residual = diag.entropy_balance_residual
    row.total_energy_residual = diag.total_energy_residual
    row.sigma_min = diag.sigma_min
    row.max_abs_compat = max((abs(c) for c in diag.compat), default=0.0)
    row.ledger = {e.key: e.lhs for e in diag.ledger if e.key in LEDGER_KEYS}
    return row


def _failed_row(axis: str, value: float, err: Exception) -> SweepRow:
    return SweepRow(axis=axis, value=value, status=f"failed: {type(err).__name__}")


def _final_record(report: ConstructionReport, delta: float) -> Optional[StageRecord]:
    for record in report.final_stages():
        if record.delta == delta:
            return record
    return None


def _run_config(
    config: ProblemConfig, base_dir: str, digest: str
) -> Tuple[Optional[ConstructionReport], Optional[MixSteadyError]]:
    """Worker entry point; returns the (possibly partial) report and the error."""
    problem = Problem(config, base_dir=base_dir, digest=digest)
    try:
        _, report = run_construction(problem)
        return report, None
    except MixSteadyError as err:
        partial = err.report if isinstance(err.report, ConstructionReport) else None
        # the attached report cannot cross the process boundary together with the error
        err.report = None
        return partial, err


def _delta_config(problem: Problem, deltas: Sequence[float]) -> ProblemConfig:
    return update_config(problem.config, continuation={"delta_schedule": list(deltas)})


def sweep_delta(problem: Problem, values: Sequence[float], jobs: int = 1) -> List[SweepRow]:
    values = [float(v) for v in values]
    config = _delta_config(problem, values)
    base = str(problem.base_dir)
    if jobs <= 1:
        outcomes = [_run_config(config, base, problem.digest)]
    else:
        prefixes = [_delta_config(problem, values[: i + 1]) for i in range(len(values))]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_config, prefixes, [base] * len(values), [problem.digest] * len(values)))

    rows: List[SweepRow] = []
    broken: Optional[Exception] = None
    for i, delta in enumerate(values):
        report, err = outcomes[0] if jobs <= 1 else outcomes[i]
        record = _final_record(report, delta) if report is not None and broken is None else None
        if record is not None:
            rows.append(row_from_stage("delta", delta, record))
            continue
        # every later row depends on this one through the warm-start chain
        if broken is None:
            broken = err or RuntimeError("stage record missing")
            logger.warning("delta sweep row %g failed: %s", delta, broken)
        rows.append(_failed_row("delta", delta, broken))
    return rows


def sweep_M(problem: Problem, values: Sequence[float], jobs: int = 1) -> List[SweepRow]:
    configs = [update_config(problem.config, continuation={"M": float(v)}) for v in values]
    base = str(problem.base_dir)
    if jobs <= 1:
        outcomes = [_run_config(c, base, problem.digest) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_config, configs, [base] * len(configs), [problem.digest] * len(configs)))

    rows: List[SweepRow] = []
    final_delta = problem.params.delta_schedule[-1]
    for value, (report, err) in zip(values, outcomes):
        record = _final_record(report, final_delta) if report is not None else None
        if err is None and record is not None:
            rows.append(row_from_stage("M", float(value), record))
        else:
            logger.warning("M sweep row %g failed: %s", value, err)
            rows.append(_failed_row("M", float(value), err or RuntimeError("missing")))
    return rows


def _fit(rows: Sequence[SweepRow], attr: str, against: str) -> SweepFit:
    pts = [(r.value, getattr(r, attr)) for r in rows if r.status == "ok"]
    pts = [(x, y) for x, y in pts if y is not None and x > 0.0 and y > 0.0]
    fit = SweepFit(quantity=attr, against=against, points=len(pts))
    if len(pts) >= 2:
        slope, _ = np.polyfit(np.log([x for x, _ in pts]), np.log([y for _, y in pts]), 1)
        fit.slope = float(slope)
    return fit


def run_sweep(problem: Problem, axis: str, values: Sequence[float], jobs: int = 1) -> SweepResult:
    """One row per value plus log-log slope summaries."""
    if not values:
        raise PreconditionError("sweep needs at least one value")
    if axis == "delta":
        rows = sweep_delta(problem, values, jobs)
    elif axis == "M":
        rows = sweep_M(problem, values, jobs)
    else:
        raise PreconditionError(f"unknown sweep axis '{axis}' (choose delta or M)")

    result = SweepResult(axis=axis, rows=rows)
    ok = [r for r in rows if r.status == "ok"]
    # a failed row voids every verdict
    complete = len(ok) == len(rows)
    result.g_val_one = complete and all(r.g_val == 1.0 for r in ok)
    if axis == "delta":
        result.fits.append(_fit(rows, "mass_defect_l2", "delta"))
        result.fits.append(_fit(rows, "mass_defect_w12", "delta"))
    else:
        result.fits.append(_fit(rows, "xi_over_M", "M"))
        ratios = [r.xi_over_M for r in ok if r.xi_over_M is not None]
        if not complete:
            result.xi_over_M_decreasing = False
        elif len(ratios) > 1:
            result.xi_over_M_decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
        result.independence = mark_independence(rows, ("apriori1",))
    logger.info("sweep over %s: %d/%d rows ok", axis, len(ok), len(rows))
    return result

