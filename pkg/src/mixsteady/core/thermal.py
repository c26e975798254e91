"""Thermal subsolver in the log temperature z = log theta.

The conductive flux ``(delta + e^z) kappa_lam grad z`` with
``kappa_lam = kappa0 rho_lam (1 + e^{3z})`` is written as
``kappa0 rho_lam grad Phi(z)``, so the operator is a weighted Laplacian of a
monotone function of z and the discretization stays conservative.
"""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mixsteady.core.newton import newton_solve
from mixsteady.core.reports import SubsolveReport
from mixsteady.errors import PreconditionError
from mixsteady.physics.boundary import RobinBC, apply_robin_bc
from mixsteady.physics.grid import Grid
from mixsteady.physics.models import MixtureSpec, SubsolverConfig
from mixsteady.physics.viscous import viscous_dissipation

logger = logging.getLogger(__name__)


def conduction_potential(z: np.ndarray, delta: float) -> np.ndarray:
    """Phi(z) = delta z + delta e^{3z}/3 + e^z + e^{4z}/4."""
    ez = np.exp(z)
    return delta * z + delta * ez**3 / 3.0 + ez + ez**4 / 4.0


def conduction_potential_derivative(z: np.ndarray, delta: float) -> np.ndarray:
    ez = np.exp(z)
    return (delta + ez) * (1.0 + ez**3)


def heat_source(
    lam: float,
    rho: np.ndarray,
    u: np.ndarray,
    z_bar: np.ndarray,
    w_bar: np.ndarray,
    w: np.ndarray,
    epsilon: float,
    g_val: float,
    spec: MixtureSpec,
    grid: Grid,
    scheme: str,
    M: float,
) -> np.ndarray:
    """Right-hand side of the temperature equation.

    S:grad u - lam rho (e^z_bar / g) div u - lam rho u.grad(e_m)
    + lam sum_k c_pk div(e^z_bar (D_lam grad e^w_k + eps grad w_k)).
    """
    Q = viscous_dissipation(grid, rho, u)
    if lam == 0.0:
        return Q
    theta_bar = np.exp(z_bar)
    e_m = theta_bar * np.tensordot(spec.cv, np.exp(w_bar), axes=1) / g_val
    Q = Q - lam * rho * theta_bar / g_val * grid.dilatation(u)
    Q = Q - lam * rho * grid.advect(u, e_m, scheme)
    D_lam = spec.D0 * (M + lam * (rho - M))
    for k in range(w.shape[0]):
        diffusive = grid.div_a_grad(theta_bar * D_lam, np.exp(w[k])) + epsilon * grid.div_a_grad(theta_bar, w[k])
        Q = Q + lam * spec.cp[k] * diffusive
    return Q


class ThermalEquation:
    def __init__(
        self,
        grid: Grid,
        rho_lam: np.ndarray,
        delta: float,
        rhs: np.ndarray,
        bc: RobinBC,
        kappa0: float,
    ) -> None:
        self.grid = grid
        self.delta = delta
        self.rhs = np.asarray(rhs, dtype=float).ravel()
        self.bc = bc
        self.L_K = grid.div_a_grad_matrix(kappa0 * rho_lam)

    def residual(self, z: np.ndarray) -> np.ndarray:
        g = self.grid
        interior = -(self.L_K @ conduction_potential(z, self.delta)) - self.rhs
        res, _ = apply_robin_bc(g, interior.reshape(g.shape), None, z.reshape(g.shape), self.bc)
        return res.ravel()

    def jacobian(self, z: np.ndarray) -> sp.csr_matrix:
        g = self.grid
        J = -(self.L_K @ sp.diags(conduction_potential_derivative(z, self.delta)))
        _, J = apply_robin_bc(g, np.zeros(g.shape), J, z.reshape(g.shape), self.bc)
        return J


def solve_thermal(
    lam: float,
    rho: np.ndarray,
    u: np.ndarray,
    z_bar: np.ndarray,
    w_bar: np.ndarray,
    w: np.ndarray,
    epsilon: float,
    delta: float,
    g_val: float,
    theta_b: np.ndarray,
    spec: MixtureSpec,
    grid: Grid,
    config: SubsolverConfig,
    *,
    z0: Optional[np.ndarray] = None,
    source: Optional[np.ndarray] = None,
    boundary_source: Optional[np.ndarray] = None,
    M: Optional[float] = None,
) -> Tuple[np.ndarray, SubsolveReport]:
    """Solve for z with the Robin condition -K grad z.n = L_lam(e^z - Theta) + eps z."""
    theta_b = np.asarray(theta_b, dtype=float)
    if not np.all(theta_b[grid.boundary_mask] > 0.0):
        raise PreconditionError("boundary temperature must be > 0")
    if g_val < 1.0:
        raise PreconditionError(f"cap value must be >= 1, got {g_val}")
    rho = np.asarray(rho, dtype=float)
    if M is None:
        M = float(grid.mean(rho))
    rho_lam = M + lam * (rho - M)

    Q = heat_source(lam, rho, u, z_bar, w_bar, w, epsilon, g_val, spec, grid, config.convection, M)
    if source is not None:
        Q = Q + source

    L0 = spec.L0

    def coefficient(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        e3 = np.exp(3.0 * z)
        return L0 * rho_lam * (1.0 + e3), 3.0 * L0 * rho_lam * e3

    bc = RobinBC(theta_b, epsilon, coefficient, boundary_source)
    eq = ThermalEquation(grid, rho_lam, delta, Q, bc, spec.kappa0)
    start = z_bar if z0 is None else z0
    # Phi carries e^{4z}
    z, report = newton_solve(
        eq.residual, eq.jacobian, np.asarray(start, dtype=float).ravel(), config,
        name="thermal", guard=config.exp_guard / 4.0,
    )
    logger.debug("thermal solved in %d Newton steps", report.iterations)
    return z.reshape(grid.shape), report
