"""Homotopy construction: damped fixed point of F_lambda, lambda 0 -> 1, delta -> 0.

``F_lambda`` maps a barred state to the solution of the three decoupled
subproblems (flow, then species, then thermal). At lambda = 0 the map does
not read the barred state at all, so the anchor solve is unique and reached
in one application.
"""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from mixsteady import __version__
from mixsteady.core.diagnostics import diagnose, mass_defect
from mixsteady.core.flow import solve_flow
from mixsteady.core.reports import (
    ConstructionReport,
    DefectPoint,
    MembershipReport,
    SetCheck,
    SetVerdict,
    StageRecord,
    SubsolveReport,
)
from mixsteady.core.species import solve_species
from mixsteady.core.thermal import solve_thermal
from mixsteady.errors import MaxIterations, MixSteadyError, PreconditionError
from mixsteady.physics.grid import Grid
from mixsteady.physics.mixture import cap_function
from mixsteady.physics.models import ContinuationParams
from mixsteady.physics.problem import Problem
from mixsteady.physics.state import FieldState

logger = logging.getLogger(__name__)

StageCallback = Callable[[StageRecord], None]


def composite_norm(a: FieldState, b: FieldState, grid: Grid, gamma: float, p: float) -> float:
    """M^(gamma-2) |dr|_{1,p} + |du|_{1,p} + |dtheta|_{1,p} + |dY|_{1,p}."""
    return (
        a.M ** (gamma - 2.0) * grid.w1p(a.r - b.r, p)
        + grid.w1p(a.u - b.u, p)
        + grid.w1p(a.theta - b.theta, p)
        + grid.w1p(a.Y - b.Y, p)
    )


def anchor_state(problem: Problem) -> FieldState:
    """Start state (r, u, z, w) = (0, 0, log mean Theta, log 1/n)."""
    return FieldState.uniform(problem.grid, problem.params.M, problem.spec.n, theta=problem.theta_mean)


def apply_F_lambda(
    state_bar: FieldState, lam: float, delta: float, problem: Problem
) -> Tuple[FieldState, float, List[SubsolveReport]]:
    """One application of F_lambda; returns ``(state, g_val, subsolve reports)``."""
    if not 0.0 <= lam <= 1.0:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    if not state_bar.is_finite():
        raise PreconditionError("barred state is not finite")
    grid, spec, params, solver = problem.grid, problem.spec, problem.params, problem.solver
    eps = params.epsilon(delta)
    M = state_bar.M
    g_val = cap_function(grid.w1p(state_bar.theta, params.p), params.C0)
    # warm start from the barred state; the anchor map starts from a fixed state
    start = anchor_state(problem) if lam == 0.0 else state_bar

    try:
        r, u, flow_report = solve_flow(
            M, lam, state_bar.u, lam * state_bar.theta / g_val, problem.force, spec, grid, solver,
            r0=start.r, u0=start.u,
        )
        rho = M + r
        w, species_reports = solve_species(
            lam, rho, state_bar.u, state_bar.theta, state_bar.w, eps, delta, g_val, spec, grid, solver,
            w0=start.w, M=M,
        )
        z, thermal_report = solve_thermal(
            lam, rho, u, state_bar.z, state_bar.w, w, eps, delta, g_val, problem.theta_b, spec, grid, solver,
            z0=start.z, M=M,
        )
    except MixSteadyError as err:
        raise err.annotate(lam, delta)
    return FieldState(M, r, u, z, w), g_val, [flow_report, *species_reports, thermal_report]


def solve_at(
    lam: float, delta: float, warm_start: FieldState, problem: Problem
) -> Tuple[FieldState, StageRecord]:
    """Damped iteration x <- (1 - theta) x + theta F_lambda(x) until |F(x) - x| <= fp_tol.

    No damping is applied at lambda = 0, where F does not depend on x.
    """
    if not warm_start.is_finite():
        raise PreconditionError("warm start is not finite")
    params = problem.params
    grid, gamma = problem.grid, problem.spec.gamma
    weight = 1.0 if lam == 0.0 else params.damping
    x = warm_start
    history: List[float] = []
    for it in range(1, params.max_fp + 1):
        fx, g_val, subsolves = apply_F_lambda(x, lam, delta, problem)
        update = composite_norm(fx, x, grid, gamma, params.p)
        history.append(update)
        logger.debug("lam=%g delta=%g iteration %d: update %.3e", lam, delta, it, update)
        if update <= params.fp_tol:
            record = StageRecord(
                lam=lam, delta=delta, epsilon=params.epsilon(delta), iterations=it,
                update_norm=update, update_history=history, g_val=g_val, subsolves=subsolves,
            )
            return fx, record
        x = x.blend(fx, weight)
    err = MaxIterations(
        f"fixed point not reached in {params.max_fp} iterations (last update {history[-1]:.3e})"
    )
    raise err.annotate(lam, delta)


def _check(name: str, value: float, bound: float) -> SetCheck:
    return SetCheck(quantity=name, value=float(value), bound=float(bound), holds=bool(value <= bound))


def check_membership(state: FieldState, grid: Grid, params: ContinuationParams, gamma: float) -> MembershipReport:
    """Measured norms against the radii E (low-order) and C_f (high-order) of the four sets."""
    E, C_f, p = params.E, params.C_f, params.p
    grad_u = grid.gradient(state.u)
    u_checks = [
        _check("|grad u|_2", grid.lp(grad_u, 2.0), E),
        _check("|grad u|_inf + |u|_inf", grid.lp(grad_u, np.inf) + grid.lp(state.u, np.inf), C_f),
    ]
    scale = state.M ** (gamma - 2.0)
    mean_r = abs(float(grid.mean(state.r)))
    r_checks = [
        _check("M^(gamma-2) (|r|_inf + |grad r|_p)", scale * (grid.lp(state.r, np.inf) + grid.lp(grid.gradient(state.r), p)), C_f),
        _check("|mean r|", mean_r, 1e-10 * max(1.0, state.M)),
    ]
    th32 = state.theta**1.5
    theta_checks = [
        _check("|theta|_9^(3/2) + |grad theta^(3/2)|_2", grid.lp(state.theta, 9.0) ** 1.5 + grid.lp(grid.gradient(th32), 2.0), E),
        _check("|theta|_{1,p}", grid.w1p(state.theta, p), C_f),
    ]
    Y_checks = [
        _check("|Y|_{1,2}", grid.w1p(state.Y, 2.0), E),
        _check("|grad Y|_p", grid.lp(grid.gradient(state.Y), p), C_f),
    ]
    sets = [
        SetVerdict(name=name, holds=all(c.holds for c in checks), checks=checks)
        for name, checks in (("M_u", u_checks), ("M_r", r_checks), ("M_theta", theta_checks), ("M_Y", Y_checks))
    ]
    return MembershipReport(sets=sets)


def run_construction(
    problem: Problem, on_stage: Optional[StageCallback] = None
) -> Tuple[FieldState, ConstructionReport]:
    """For each delta (eps = delta^3) continue lambda from 0 to 1, warm-starting every stage.

    On failure the stage error is re-raised with the partial report attached
    as ``err.report``.
    """
    params = problem.params
    if params.M < params.M_min:
        raise PreconditionError(f"M = {params.M:g} is below the configured minimum {params.M_min:g}")
    if not (np.all(np.isfinite(problem.force)) and np.all(np.isfinite(problem.theta_b))):
        raise PreconditionError("problem data must be finite")
    for delta in params.delta_schedule:
        if not params.epsilon(delta) > 0.0:
            raise PreconditionError(f"epsilon = delta^3 underflows to zero for delta = {delta:g}")

    report = ConstructionReport(version=__version__, config_sha256=problem.digest, M=params.M)
    state = anchor_state(problem)
    lam, delta = 0.0, params.delta_schedule[0]
    try:
        for delta in params.delta_schedule:
            for lam in params.lambdas:
                state, record = solve_at(lam, delta, state, problem)
                record.membership = check_membership(state, problem.grid, params, problem.spec.gamma)
                record.diagnostics = diagnose(state, problem, delta)
                report.stages.append(record)
                logger.info(
                    "stage lambda=%.3g delta=%.3g accepted after %d iterations (g=%.3g)",
                    lam, delta, record.iterations, record.g_val,
                )
                if on_stage is not None:
                    on_stage(record)
            l2, w12 = mass_defect(state, problem.grid)
            report.defect_trace.append(DefectPoint(delta=delta, l2=l2, w12=w12))
    except MixSteadyError as err:
        err.annotate(lam, delta)
        report.failure = str(err)
        err.report = report
        logger.error("construction aborted: %s", err)
        raise

    report.completed = True
    report.final_g_val = report.stages[-1].g_val
    return state, report
