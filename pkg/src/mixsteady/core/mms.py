"""Manufactured-solution verification and the scalar oracles used to check the solvers.

Forcing terms are the strong-form residuals of analytic fields, evaluated with
sixth-order central differences at a step of a quarter of the mesh width
(nested for flux divergences). Manufactured fields have zero normal
derivative of z and w on the walls and zero normal velocity, so the boundary
conditions only need the Robin and traction corrections computed here.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize

from mixsteady.core.flow import solve_flow
from mixsteady.core.homotopy import composite_norm
from mixsteady.core.reports import MmsLevel, MmsReport
from mixsteady.core.species import solve_species, species_explicit_terms
from mixsteady.core.thermal import conduction_potential, solve_thermal
from mixsteady.errors import PreconditionError
from mixsteady.physics.grid import Grid
from mixsteady.physics.mixture import cap_function, double_dot, production_rates, viscous_stress
from mixsteady.physics.models import MixtureSpec
from mixsteady.physics.problem import Problem, update_config
from mixsteady.physics.state import FieldState

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
MmsCase = Literal["thermal", "species", "flow", "coupled"]
MMS_CASES: Tuple[str, ...] = ("thermal", "species", "flow", "coupled")
DEFAULT_LEVELS: Tuple[int, ...] = (16, 32, 64, 128)

_STENCIL = ((-3, -1.0), (-2, 9.0), (-1, -45.0), (1, 45.0), (2, -9.0), (3, 1.0))

Z_AMPLITUDE = 0.3
W_AMPLITUDE = 0.3
U_AMPLITUDE = 0.5
R_FRACTION = 0.02
THETA_EFF = 1.0


# -- sixth-order differences of analytic fields --


def ddx(f: Field, h: float) -> Field:
    return lambda X, Y: sum(c * f(X + k * h, Y) for k, c in _STENCIL) / (60.0 * h)


def ddy(f: Field, h: float) -> Field:
    return lambda X, Y: sum(c * f(X, Y + k * h) for k, c in _STENCIL) / (60.0 * h)


def div_a_grad_fd(a: Field, f: Field, h: float) -> Field:
    """div(a grad f) by nested differences."""
    fx, fy = ddx(f, h), ddy(f, h)
    return lambda X, Y: ddx(lambda x, y: a(x, y) * fx(x, y), h)(X, Y) + ddy(lambda x, y: a(x, y) * fy(x, y), h)(X, Y)


def _const(value: float) -> Field:
    return lambda X, Y: np.full(np.shape(X), value)


class Manufactured:
    """Analytic fields (r, u, z, w_k) on the rectangle [0, Lx] x [0, Ly]."""

    def __init__(self, grid: Grid, M: float, n: int) -> None:
        self.Lx, self.Ly = grid.Lx, grid.Ly
        self.M = M
        self.n = n
        ax, ay = math.pi / grid.Lx, math.pi / grid.Ly
        self.cc: Field = lambda X, Y: np.cos(ax * X) * np.cos(ay * Y)
        self.r: Field = lambda X, Y: R_FRACTION * M * np.cos(ax * X) * np.cos(ay * Y)
        self.ux: Field = lambda X, Y: U_AMPLITUDE * np.sin(ax * X) * np.cos(ay * Y)
        self.uy: Field = lambda X, Y: -U_AMPLITUDE * np.cos(ax * X) * np.sin(ay * Y)
        self.z: Field = lambda X, Y: Z_AMPLITUDE * np.cos(ax * X) * np.cos(ay * Y)
        base = math.log(1.0 / n)
        self.w: List[Field] = [
            (lambda X, Y, k=k: base + W_AMPLITUDE * (1.0 + 0.2 * k) * np.cos(ax * X) * np.cos(ay * Y))
            for k in range(n)
        ]

    def rho(self) -> Field:
        return lambda X, Y: self.M + self.r(X, Y)

    def state(self, grid: Grid) -> FieldState:
        X, Y = grid.X, grid.Y
        return FieldState(
            self.M, self.r(X, Y), np.stack([self.ux(X, Y), self.uy(X, Y)]), self.z(X, Y),
            np.stack([wk(X, Y) for wk in self.w]),
        )


# -- strong-form residuals --


def flow_forcing(
    mf: Manufactured, grid: Grid, spec: MixtureSpec, lam: float, theta_eff: Field, f_fric: float
) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Momentum/continuity sources and the wall traction g = (S n).tau + f u.tau."""
    h = min(grid.hx, grid.hy) / 4.0
    rho = mf.rho()
    u = (mf.ux, mf.uy)
    grads = [[ddx(u[a], h), ddy(u[a], h)] for a in range(2)]

    def S(a: int, b: int) -> Field:
        return lambda X, Y: rho(X, Y) * (grads[a][b](X, Y) + grads[b][a](X, Y))

    pi: Field = lambda X, Y: rho(X, Y) ** spec.gamma + rho(X, Y) * theta_eff(X, Y)
    X, Y = grid.X, grid.Y
    momentum = np.zeros((2,) + grid.shape)
    dpi = (ddx(pi, h), ddy(pi, h))
    for a in range(2):
        div_S = ddx(S(a, 0), h)(X, Y) + ddy(S(a, 1), h)(X, Y)
        conv = lam * rho(X, Y) * (mf.ux(X, Y) * grads[a][0](X, Y) + mf.uy(X, Y) * grads[a][1](X, Y))
        momentum[a] = conv - div_S + dpi[a](X, Y)
    mass_x: Field = lambda x, y: rho(x, y) * mf.ux(x, y)
    mass_y: Field = lambda x, y: rho(x, y) * mf.uy(x, y)
    continuity = ddx(mass_x, h)(X, Y) + ddy(mass_y, h)(X, Y)

    nrm = grid.normal
    traction = np.zeros((2,) + grid.shape)
    for a in range(2):
        traction[a] = S(a, 0)(X, Y) * nrm[0] + S(a, 1)(X, Y) * nrm[1] + f_fric * u[a](X, Y)
    traction[:, ~grid.boundary_mask] = 0.0
    return {"momentum": momentum, "continuity": continuity}, traction


def species_forcing(
    mf: Manufactured,
    grid: Grid,
    spec: MixtureSpec,
    lam: float,
    epsilon: float,
    delta: float,
    g_val: float,
    *,
    rho_nodes: Optional[np.ndarray] = None,
    advection: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Strong residual of every species equation with the barred state equal to the exact one.

    ``rho_nodes`` replaces the exact density in the lambda terms and
    ``advection`` the exact advection term, so a solve with a discrete barred
    state sees the same frozen terms it assembles itself.
    """
    h = min(grid.hx, grid.hy) / 4.0
    X, Y = grid.X, grid.Y
    rho = mf.rho()
    rho_lam = rho(X, Y) if rho_nodes is None else rho_nodes
    D_lam: Field = (lambda x, y: spec.D0 * (mf.M + lam * (rho(x, y) - mf.M)))
    one = _const(1.0)
    n = mf.n
    out = np.zeros((n,) + grid.shape)
    omega = None
    if lam != 0.0:
        omega = production_rates(np.exp(mf.z(X, Y)), np.stack([np.exp(wk(X, Y)) for wk in mf.w]), spec)
    for k, wk in enumerate(mf.w):
        ew: Field = lambda x, y, wk=wk: np.exp(wk(x, y))
        w = wk(X, Y)
        diffusion = div_a_grad_fd(D_lam, ew, h)(X, Y) + epsilon * div_a_grad_fd(one, wk, h)(X, Y)
        out[k] = epsilon * w - diffusion + delta * np.exp(w) - delta / n
        if omega is not None:
            if advection is None:
                adv = mf.ux(X, Y) * ddx(ew, h)(X, Y) + mf.uy(X, Y) * ddy(ew, h)(X, Y)
                out[k] += lam * rho_lam * adv / g_val
            else:
                out[k] += advection[k]
            out[k] -= lam * rho_lam * omega[k]
    return out


def thermal_forcing(
    mf: Manufactured,
    grid: Grid,
    spec: MixtureSpec,
    lam: float,
    epsilon: float,
    delta: float,
    g_val: float,
) -> np.ndarray:
    """-div(kappa0 rho_lam grad Phi(z)) minus the heat source, at the exact fields."""
    h = min(grid.hx, grid.hy) / 4.0
    X, Y = grid.X, grid.Y
    rho = mf.rho()
    rho_lam: Field = lambda x, y: mf.M + lam * (rho(x, y) - mf.M)
    K: Field = lambda x, y: spec.kappa0 * rho_lam(x, y)
    phi: Field = lambda x, y: conduction_potential(mf.z(x, y), delta)
    lhs = -div_a_grad_fd(K, phi, h)(X, Y)

    u = (mf.ux, mf.uy)
    grad = np.array([[ddx(u[a], h)(X, Y), ddy(u[a], h)(X, Y)] for a in range(2)])
    Q = double_dot(viscous_stress(rho(X, Y), grad), grad)
    if lam != 0.0:
        theta: Field = lambda x, y: np.exp(mf.z(x, y))
        div_u = grad[0][0] + grad[1][1]
        e_m: Field = lambda x, y: theta(x, y) * sum(
            c * np.exp(wk(x, y)) for c, wk in zip(spec.cv, mf.w)
        ) / g_val
        Q = Q - lam * rho(X, Y) * theta(X, Y) / g_val * div_u
        Q = Q - lam * rho(X, Y) * (mf.ux(X, Y) * ddx(e_m, h)(X, Y) + mf.uy(X, Y) * ddy(e_m, h)(X, Y))
        D_lam: Field = lambda x, y: spec.D0 * (mf.M + lam * (rho(x, y) - mf.M))
        for c, wk in zip(spec.cp, mf.w):
            ew: Field = lambda x, y, wk=wk: np.exp(wk(x, y))
            a1: Field = lambda x, y: theta(x, y) * D_lam(x, y)
            Q = Q + lam * c * (div_a_grad_fd(a1, ew, h)(X, Y) + epsilon * div_a_grad_fd(theta, wk, h)(X, Y))
    return lhs - Q


# -- cases --


def _regularization(problem: Problem) -> Tuple[float, float]:
    delta = problem.params.delta_schedule[0]
    return problem.params.epsilon(delta), delta


def thermal_case(problem: Problem) -> Tuple[float, Optional[float]]:
    grid, spec, M = problem.grid, problem.spec, problem.params.M
    eps, delta = _regularization(problem)
    mf = Manufactured(grid, M, spec.n)
    exact = mf.state(grid)
    z_ex = exact.z
    source = thermal_forcing(mf, grid, spec, 0.0, eps, delta, 1.0)
    dummy = np.full((spec.n,) + grid.shape, math.log(1.0 / spec.n))
    # the forcing carries the dissipation of the exact flow
    z, _ = solve_thermal(
        0.0, exact.rho, exact.u, z_ex, dummy, dummy, eps, delta, 1.0,
        np.exp(z_ex), spec, grid, problem.solver,
        z0=np.zeros(grid.shape), source=source, boundary_source=-eps * z_ex, M=M,
    )
    return grid.lp(z - z_ex, 2.0), None


def species_case(problem: Problem) -> Tuple[float, Optional[float]]:
    """lambda = 0 species solve; also compares the Kirchhoff and direct Newton paths."""
    grid, spec, M = problem.grid, problem.spec, problem.params.M
    eps, delta = _regularization(problem)
    mf = Manufactured(grid, M, spec.n)
    w_ex = np.stack([wk(grid.X, grid.Y) for wk in mf.w])
    source = species_forcing(mf, grid, spec, 0.0, eps, delta, 1.0)
    rho = np.full(grid.shape, M)
    u0 = np.zeros((2,) + grid.shape)
    start = np.full_like(w_ex, math.log(1.0 / spec.n))
    solved = {}
    for method in ("kirchhoff", "newton"):
        solved[method], _ = solve_species(
            0.0, rho, u0, np.ones(grid.shape), start, eps, delta, 1.0, spec, grid, problem.solver,
            source=source, method=method, M=M,
        )
    dual = float(np.max(np.abs(solved["kirchhoff"] - solved["newton"])))
    return grid.lp(solved["newton"] - w_ex, 2.0), dual


def flow_case(problem: Problem) -> Tuple[float, Optional[float]]:
    """lambda = 1 flow with u_bar = u*, constant effective temperature; error |u - u*|_2 + |r - r*|_2."""
    grid, spec, M = problem.grid, problem.spec, problem.params.M
    mf = Manufactured(grid, M, spec.n)
    source, traction = flow_forcing(mf, grid, spec, 1.0, _const(THETA_EFF), spec.f_fric)
    exact = mf.state(grid)
    r, u, _ = solve_flow(
        M, 1.0, exact.u, np.full(grid.shape, THETA_EFF), np.zeros((2,) + grid.shape), spec, grid,
        problem.solver, source=source, traction_source=traction,
    )
    return grid.lp(u - exact.u, 2.0) + grid.lp(r - exact.r, 2.0), None


def coupled_case(problem: Problem) -> Tuple[float, Optional[float]]:
    """One lambda = 1 application of the subsolver chain from the exact barred state.

    With all forcings appended the exact state is a fixed point of the
    continuous map; the error is the composite norm of F(x*) - x*.
    """
    grid, spec, params, solver = problem.grid, problem.spec, problem.params, problem.solver
    M = params.M
    eps, delta = _regularization(problem)
    mf = Manufactured(grid, M, spec.n)
    exact = mf.state(grid)
    g_val = cap_function(grid.w1p(exact.theta, params.p), params.C0)
    theta_eff: Field = lambda x, y: np.exp(mf.z(x, y)) / g_val

    flow_src, traction = flow_forcing(mf, grid, spec, 1.0, theta_eff, spec.f_fric)
    r, u, _ = solve_flow(
        M, 1.0, exact.u, exact.theta / g_val, np.zeros((2,) + grid.shape), spec, grid, solver,
        r0=exact.r, u0=exact.u, source=flow_src, traction_source=traction,
    )
    rho = M + r
    advection = species_explicit_terms(
        1.0, rho, exact.u, exact.theta, exact.w, g_val, spec, grid, solver.convection
    )
    w, _ = solve_species(
        1.0, rho, exact.u, exact.theta, exact.w, eps, delta, g_val, spec, grid, solver,
        source=species_forcing(mf, grid, spec, 1.0, eps, delta, g_val, rho_nodes=rho, advection=advection),
        M=M,
    )
    z, _ = solve_thermal(
        1.0, rho, u, exact.z, exact.w, w, eps, delta, g_val, exact.theta, spec, grid, solver,
        z0=exact.z, source=thermal_forcing(mf, grid, spec, 1.0, eps, delta, g_val),
        boundary_source=-eps * exact.z, M=M,
    )
    result = FieldState(M, r, u, z, w)
    return composite_norm(result, exact, grid, spec.gamma, 2.0), None


_CASES: Dict[str, Callable[[Problem], Tuple[float, Optional[float]]]] = {
    "thermal": thermal_case,
    "species": species_case,
    "flow": flow_case,
    "coupled": coupled_case,
}


def observed_order(h: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Slope of log(error) against log(h) by least squares."""
    pairs = [(a, e) for a, e in zip(h, errors) if e > 0.0]
    if len(pairs) < 2:
        return None
    slope, _ = np.polyfit(np.log([a for a, _ in pairs]), np.log([e for _, e in pairs]), 1)
    return float(slope)


def run_mms(
    problem: Problem,
    case: str,
    levels: Sequence[int] = DEFAULT_LEVELS,
    convection: Optional[str] = None,
) -> MmsReport:
    """Run one case on the given cell counts; levels must increase."""
    if case not in _CASES:
        raise PreconditionError(f"unknown MMS case '{case}' (choose from {', '.join(MMS_CASES)})")
    if len(levels) < 2 or any(b <= a for a, b in zip(levels, levels[1:])):
        raise PreconditionError("MMS needs at least two increasing grid levels")
    scheme = convection or problem.solver.convection
    report = MmsReport(case=case, convection=scheme)
    hs: List[float] = []
    errs: List[float] = []
    for cells in levels:
        config = update_config(problem.config, grid={"nx": cells, "ny": cells}, solver={"convection": scheme})
        level_problem = problem.with_config(config)
        error, dual = _CASES[case](level_problem)
        h = max(level_problem.grid.hx, level_problem.grid.hy)
        order = None
        if errs and errs[-1] > 0.0 and error > 0.0:
            order = math.log(errs[-1] / error) / math.log(hs[-1] / h)
        hs.append(h)
        errs.append(error)
        report.levels.append(MmsLevel(nx=cells, ny=cells, h=h, error=error, order=order))
        if dual is not None:
            report.dual_path_difference = dual
        logger.info("mms %s %dx%d: error %.4e order %s", case, cells, cells, error, f"{order:.3f}" if order else "-")
    report.observed_order = observed_order(hs, errs)
    return report


# -- scalar oracles --


def _increasing_root(f: Callable[[float], float]) -> float:
    lo, hi = -1.0, 1.0
    while f(lo) > 0.0:
        lo *= 2.0
    while f(hi) < 0.0:
        hi *= 2.0
    return float(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500))


def species_constant_root(epsilon: float, delta: float, n: int) -> float:
    """Root of eps w + delta e^w = delta / n."""
    return _increasing_root(lambda w: epsilon * w + delta * math.exp(w) - delta / n)


def thermal_constant_root(theta0: float, epsilon: float, L0: float, M: float) -> float:
    """Root of L0 M (1 + e^{3z}) (e^z - Theta0) + eps z."""
    return _increasing_root(lambda z: L0 * M * (1.0 + math.exp(3.0 * z)) * (math.exp(z) - theta0) + epsilon * z)


def uniform_equilibrium(
    spec: MixtureSpec, M: float, theta0: float, delta: float, lam: float = 1.0
) -> Tuple[float, np.ndarray]:
    """Spatially uniform fixed point (z, w) of the lambda-system with u = 0, r = 0.

    Species: eps w_k + delta e^{w_k} - delta/n - lam M omega_k = 0.
    Temperature: L0 M (1 + e^{3z}) (e^z - Theta0) + eps z = 0.
    """
    eps = delta**3
    n = spec.n

    def equations(x: np.ndarray) -> np.ndarray:
        z, w = x[0], x[1:]
        omega = production_rates(np.exp(z), np.exp(w), spec)
        species = eps * w + delta * np.exp(w) - delta / n - lam * M * omega
        thermal = spec.L0 * M * (1.0 + np.exp(3.0 * z)) * (np.exp(z) - theta0) + eps * z
        return np.concatenate([[thermal], species])

    x0 = np.concatenate([[math.log(theta0)], np.full(n, species_constant_root(eps, delta, n))])
    sol = optimize.root(equations, x0, method="hybr", tol=1e-14)
    if not sol.success:
        raise PreconditionError(f"uniform equilibrium not found: {sol.message}")
    return float(sol.x[0]), np.asarray(sol.x[1:])


def gradient_force_density(phi: np.ndarray, x: np.ndarray, gamma: float, M: float) -> np.ndarray:
    """Density balancing f = grad phi at rest: rho^(gamma-1) = (gamma-1)/gamma (phi + C).

    C is fixed by the trapezoidal mean of rho along x being M.
    """
    phi = np.asarray(phi, dtype=float)
    x = np.asarray(x, dtype=float)
    k = (gamma - 1.0) / gamma
    length = x[-1] - x[0]

    def density(C: float) -> np.ndarray:
        return (k * (phi + C)) ** (1.0 / (gamma - 1.0))

    def mean_gap(C: float) -> float:
        return float(integrate.trapezoid(density(C), x) / length - M)

    lo = -float(np.min(phi)) + 1e-12
    hi = lo + M ** (gamma - 1.0) / k + 1.0
    while mean_gap(hi) < 0.0:
        hi *= 2.0
    C = optimize.brentq(mean_gap, lo, hi, xtol=1e-14, rtol=4.0 * np.finfo(float).eps)
    return density(C)
