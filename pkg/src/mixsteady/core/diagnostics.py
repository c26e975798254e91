"""Balance laws, entropy production and the a-priori bound ledger of a state.

Everything here is read-only over a ``FieldState`` and works on the
primitive fields (rho, u, theta, Y) so a state re-read from disk gives the
same numbers as the state that was written.
"""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from mixsteady.core.reports import DiagnosticsReport, LedgerEntry, SweepRow
from mixsteady.errors import PreconditionError
from mixsteady.physics.grid import Grid
from mixsteady.physics.mixture import (
    ThermoPoint,
    entropy_gibbs,
    fluxes,
    production_rates,
    transport_coefficients,
)
from mixsteady.physics.models import MixtureSpec
from mixsteady.physics.problem import Problem
from mixsteady.physics.state import FieldState
from mixsteady.physics.viscous import viscous_dissipation

logger = logging.getLogger(__name__)

SIGMA_TERMS = ("viscous", "thermal", "diffusive", "reactive")
INDEPENDENCE_TOLERANCE = 0.25


def _point(state: FieldState) -> ThermoPoint:
    return ThermoPoint(state.rho, state.theta, state.Y).validate()


def entropy_terms(state: FieldState, spec: MixtureSpec, grid: Grid) -> Dict[str, np.ndarray]:
    """The four nodal contributions to sigma, each nonnegative."""
    pt = _point(state)
    kappa, D, _ = transport_coefficients(pt, spec)
    grad_theta = grid.gradient(state.theta)
    grad_Y = grid.gradient(state.Y)

    viscous = viscous_dissipation(grid, pt.rho, state.u) / pt.theta
    thermal = kappa * np.sum(grad_theta**2, axis=0) / pt.theta**2
    diffusive = np.sum(D * np.sum(grad_Y**2, axis=1) / pt.Y, axis=0)

    omega = production_rates(pt.theta, pt.Y, spec)
    _, _, _, g_k, _ = entropy_gibbs(pt, spec)
    # sum_k omega_k = 0, so only the species-relative part of g_k contributes
    g_rel = g_k - np.mean(g_k, axis=0)
    reactive = -pt.rho * np.sum(omega * g_rel, axis=0) / pt.theta
    return {"viscous": viscous, "thermal": thermal, "diffusive": diffusive, "reactive": reactive}


def entropy_production(state: FieldState, spec: MixtureSpec, grid: Grid) -> Tuple[np.ndarray, float]:
    """sigma = 2 rho |D(u)|^2/theta + kappa |grad theta|^2/theta^2
    + sum_k D |grad Y_k|^2 / Y_k - sum_k rho omega_k g_k / theta.
    """
    terms = entropy_terms(state, spec, grid)
    sigma = terms["viscous"] + terms["thermal"] + terms["diffusive"] + terms["reactive"]
    return sigma, float(np.min(sigma))


def regularization_dissipation(state: FieldState, spec: MixtureSpec, grid: Grid, delta: float) -> np.ndarray:
    """Extra dissipation of the delta-shifted conductivity and the eps/delta species fluxes."""
    pt = _point(state)
    eps = delta**3
    kappa, _, _ = transport_coefficients(pt, spec)
    grad_theta = grid.gradient(state.theta)
    grad_Y = grid.gradient(state.Y)
    thermal = delta * kappa * np.sum(grad_theta**2, axis=0) / pt.theta**3
    species = np.sum((eps / pt.Y + delta) * np.sum(grad_Y**2, axis=1) / pt.Y, axis=0)
    return thermal + species


def _boundary_L(state: FieldState, spec: MixtureSpec) -> np.ndarray:
    _, _, L = transport_coefficients(ThermoPoint(state.rho, state.theta, state.Y), spec)
    return L


def entropy_balance_residual(
    state: FieldState, spec: MixtureSpec, grid: Grid, theta_b: np.ndarray, sigma: Optional[np.ndarray] = None
) -> float:
    """int sigma + oint L Theta/theta - oint L."""
    if sigma is None:
        sigma, _ = entropy_production(state, spec, grid)
    L = _boundary_L(state, spec)
    return float(
        grid.integrate(sigma) + grid.integrate_boundary(L * theta_b / state.theta) - grid.integrate_boundary(L)
    )


def total_energy_residual(
    state: FieldState, spec: MixtureSpec, grid: Grid, theta_b: np.ndarray, force: np.ndarray
) -> float:
    """oint (L (theta - Theta) + f |u|^2) - int rho f.u."""
    L = _boundary_L(state, spec)
    speed2 = np.sum(state.u**2, axis=0)
    boundary = grid.integrate_boundary(L * (state.theta - theta_b) + spec.f_fric * speed2)
    work = grid.integrate(state.rho * np.sum(force * state.u, axis=0))
    return float(boundary - work)


def xi_components(state: FieldState, grid: Grid, gamma: float, p: float) -> Dict[str, float]:
    if not p > 3.0:
        raise PreconditionError(f"xi norm needs p > 3, got {p}")
    return {
        "r": state.M ** (gamma - 2.0) * grid.w1p(state.r, p),
        "u": grid.w2p(state.u, p),
        "theta": grid.w1p(state.theta, p),
        "Y": grid.w1p(state.Y, p),
    }


def xi_norm(state: FieldState, grid: Grid, gamma: float, p: float) -> float:
    """Xi = M^(gamma-2) |r|_{1,p} + |u|_{2,p} + |theta|_{1,p} + |Y|_{1,p}."""
    return float(sum(xi_components(state, grid, gamma, p).values()))


def mass_defect(state: FieldState, grid: Grid) -> Tuple[float, float]:
    """||sum_k Y_k - 1|| in L2 and W^{1,2}."""
    d = state.sigma_Y - 1.0
    return grid.lp(d, 2.0), grid.w1p(d, 2.0)


def compatibility_residual(state: FieldState, spec: MixtureSpec, grid: Grid) -> np.ndarray:
    """int omega_k dx per species."""
    omega = production_rates(state.theta, state.Y, spec)
    return np.asarray(grid.integrate(omega))


def flux_sum_defect(state: FieldState, spec: MixtureSpec, grid: Grid, delta: float) -> Tuple[float, float]:
    """(||sum_k J_k||_2, ||sum_k F_k||_2) for the regularized and the Fick fluxes."""
    pt = _point(state)
    _, D, _ = transport_coefficients(pt, spec)
    grads = {"theta": grid.gradient(state.theta), "Y": grid.gradient(state.Y)}
    F, _, _, J = fluxes(pt, grads, spec, D_lambda=D, epsilon=delta**3, delta=delta)
    return grid.lp(np.sum(J, axis=0), 2.0), grid.lp(np.sum(F, axis=0), 2.0)


def _ratio(lhs: float, rhs: float) -> Optional[float]:
    return lhs / rhs if rhs > 0.0 else None


def bound_ledger(
    state: FieldState,
    problem: Problem,
    delta: float,
    sigma: Optional[np.ndarray] = None,
    flux_sum: Optional[float] = None,
) -> List[LedgerEntry]:
    """LHS quantities of the a-priori bounds.

    Quantities whose right-hand side is only "independent of M" carry
    ``holds=None``; they are judged across an M-sweep by ``mark_independence``.
    """
    grid, spec, params = problem.grid, problem.spec, problem.params
    p = params.p
    if sigma is None:
        sigma, _ = entropy_production(state, spec, grid)
    if flux_sum is None:
        flux_sum, _ = flux_sum_defect(state, spec, grid, delta)

    log_Y = np.log(state.Y)
    logY_12 = [grid.w1p(log_Y[k], 2.0) for k in range(state.n)]
    apriori = grid.w1p(state.u, 2.0) + grid.lp(state.theta, 9.0) + grid.w1p(state.theta, 2.0) + grid.w1p(state.Y, 2.0)
    xi = xi_components(state, grid, spec.gamma, p)
    xi_total = float(sum(xi.values()))
    defect2 = grid.lp(state.sigma_Y - 1.0, 2.0) ** 2
    defect_rhs = delta**4 * sum(v**2 for v in logY_12)
    flux_rhs = math.sqrt(state.M) * delta**2.5 * sum(logY_12)
    sigma_floor = -1e-12 * max(1.0, float(np.max(np.abs(sigma))))
    sigma_min = float(np.min(sigma))

    entries = [
        LedgerEntry(key="apriori1", description="|u|_{1,2} + |theta|_9 + |theta|_{1,2} + |Y|_{1,2}", lhs=apriori),
        LedgerEntry(key="xi_r", description="M^(gamma-2) |r|_{1,p}", lhs=xi["r"]),
        LedgerEntry(key="xi_u", description="|u|_{2,p}", lhs=xi["u"]),
        LedgerEntry(key="xi_theta", description="|theta|_{1,p}", lhs=xi["theta"]),
        LedgerEntry(key="xi_Y", description="|Y|_{1,p}", lhs=xi["Y"]),
        LedgerEntry(
            key="xi_regime", description="Xi against M", lhs=xi_total, rhs=state.M,
            ratio=_ratio(xi_total, state.M), holds=xi_total < state.M,
        ),
        LedgerEntry(
            key="sigma_y", description="|sigma_Y - 1|_2^2 against delta^4 sum_k |log Y_k|_{1,2}^2",
            lhs=defect2, rhs=defect_rhs, ratio=_ratio(defect2, defect_rhs),
        ),
        LedgerEntry(
            key="sum_flux", description="|sum_k J_k|_2 against sqrt(M) delta^(5/2) sum_k |log Y_k|_{1,2}",
            lhs=flux_sum, rhs=flux_rhs, ratio=_ratio(flux_sum, flux_rhs),
        ),
        LedgerEntry(key="log_theta", description="|log theta|_{1,2}^2", lhs=grid.w1p(np.log(state.theta), 2.0) ** 2),
        LedgerEntry(key="eps_log_Y", description="delta^3 sum_k |log Y_k|_{1,2}^2", lhs=delta**3 * sum(v**2 for v in logY_12)),
        LedgerEntry(
            key="delta_Y_log_Y", description="delta sum_k |Y_k log Y_k|_1",
            lhs=delta * sum(grid.lp(state.Y[k] * log_Y[k], 1.0) for k in range(state.n)),
        ),
        LedgerEntry(key="inv_theta_boundary", description="oint 1/theta", lhs=float(grid.integrate_boundary(1.0 / state.theta))),
        LedgerEntry(
            key="second_derivatives", description="|grad^2 theta|_p + |grad^2 Y|_p",
            lhs=grid.lp(grid.hessian(state.theta), p) + grid.lp(grid.hessian(state.Y), p),
        ),
        LedgerEntry(
            key="entropy_sign", description="min sigma against -1e-12 max(1, |sigma|_inf)",
            lhs=sigma_min, rhs=sigma_floor, holds=sigma_min >= sigma_floor,
        ),
    ]
    return entries


def diagnose(state: FieldState, problem: Problem, delta: float) -> DiagnosticsReport:
    """Full diagnostics of one state at regularization level delta."""
    grid, spec = problem.grid, problem.spec
    terms = entropy_terms(state, spec, grid)
    sigma = terms["viscous"] + terms["thermal"] + terms["diffusive"] + terms["reactive"]
    reg = regularization_dissipation(state, spec, grid, delta)
    xi = xi_norm(state, grid, spec.gamma, problem.params.p)
    l2, w12 = mass_defect(state, grid)
    flux_J, flux_F = flux_sum_defect(state, spec, grid, delta)
    return DiagnosticsReport(
        M=state.M,
        delta=delta,
        epsilon=delta**3,
        sigma_min=float(np.min(sigma)),
        sigma_max=float(np.max(sigma)),
        sigma_integral=float(grid.integrate(sigma)),
        sigma_terms={name: float(grid.integrate(terms[name])) for name in SIGMA_TERMS},
        regularization_integral=float(grid.integrate(reg)),
        entropy_balance_residual=entropy_balance_residual(state, spec, grid, problem.theta_b, sigma),
        total_energy_residual=total_energy_residual(state, spec, grid, problem.theta_b, problem.force),
        xi=xi,
        xi_over_M=xi / state.M,
        mass_defect_l2=l2,
        mass_defect_w12=w12,
        flux_sum_regularized=flux_J,
        flux_sum_physical=flux_F,
        compat=[float(c) for c in compatibility_residual(state, spec, grid)],
        ledger=bound_ledger(state, problem, delta, sigma=sigma, flux_sum=flux_J),
        sigma_field=sigma,
    )


def mark_independence(rows: Sequence[SweepRow], keys: Sequence[str] = ("apriori1",)) -> Dict[str, Optional[bool]]:
    """Empirical M-independence: a quantity holds if it varies by at most 25% across the rows.

    Variation is (max - min) / max. A sweep with a failed row cannot show
    independence, so every verdict is False then.
    """
    verdicts: Dict[str, Optional[bool]] = {}
    failed = any(row.status != "ok" for row in rows)
    for key in keys:
        if failed:
            verdicts[key] = False
            continue
        values = [row.ledger[key] for row in rows if row.status == "ok" and key in row.ledger]
        if len(values) < 2:
            verdicts[key] = None
            continue
        top = max(abs(v) for v in values)
        spread = max(values) - min(values)
        verdicts[key] = bool(top == 0.0 or spread / top <= INDEPENDENCE_TOLERANCE)
    return verdicts
