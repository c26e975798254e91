"""Flow subsolver: continuity and momentum for (r, u) by Picard iteration.

Each Picard step freezes the density inside the viscous stress, the
convection coefficient and the mass flux, linearizes the pressure around the
previous density and solves one sparse saddle system in ``X = [u_x, u_y, r]``.
The collocated pressure is stabilized by a ``h^2``-scaled Laplacian of the
linearized pressure in the continuity rows.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mixsteady.core.newton import max_norm, solve_linear
from mixsteady.core.reports import SubsolveReport
from mixsteady.errors import DensityExit, NonConvergence, PreconditionError
from mixsteady.physics.boundary import SlipBC, apply_slip_bc
from mixsteady.physics.grid import Grid
from mixsteady.physics.models import MixtureSpec, SubsolverConfig
from mixsteady.physics.viscous import viscous_blocks

logger = logging.getLogger(__name__)


class FlowSystem:
    """Linearized flow system around a frozen density ``rho_bar``."""

    def __init__(
        self,
        grid: Grid,
        M: float,
        lam: float,
        u_bar: np.ndarray,
        theta_eff: np.ndarray,
        force: np.ndarray,
        spec: MixtureSpec,
        config: SubsolverConfig,
        source: Optional[Dict[str, np.ndarray]] = None,
        traction_source: Optional[np.ndarray] = None,
    ) -> None:
        self.grid = grid
        self.M = M
        self.lam = lam
        self.u_bar = np.asarray(u_bar, dtype=float)
        self.theta_eff = np.broadcast_to(np.asarray(theta_eff, dtype=float), grid.shape)
        self.force = np.asarray(force, dtype=float)
        self.spec = spec
        self.config = config
        self.source = source or {}
        self.bc = SlipBC(spec.f_fric, traction_source)
        self._advection = grid.advection_matrix(self.u_bar, config.convection) if lam > 0.0 else None
        self._laplacian = grid.div_a_grad_matrix(np.ones(grid.shape))

    def assemble(self, r_bar: np.ndarray) -> Tuple[sp.csr_matrix, np.ndarray]:
        g = self.grid
        F = g.faces
        N = g.size
        rho = (self.M + r_bar).ravel()
        rho_fx = F["Ax"] @ rho
        rho_fy = F["Ay"] @ rho

        # -div S(rho, grad u), S = rho (grad u + grad u^T)
        Axx, Axy, Ayx, Ayy = viscous_blocks(g, rho.reshape(g.shape))
        if self._advection is not None:
            conv = self.lam * sp.diags(rho) @ self._advection
            Axx = Axx + conv
            Ayy = Ayy + conv

        theta = self.theta_eff.ravel()
        c2 = self.spec.gamma * rho ** (self.spec.gamma - 1.0) + theta
        fx, fy = self.force[0].ravel(), self.force[1].ravel()
        Bx = g.Dx @ sp.diags(c2) - sp.diags(fx)
        By = g.Dy @ sp.diags(c2) - sp.diags(fy)

        Kx = -(F["Cx"] @ sp.diags(rho_fx) @ F["Ax"])
        Ky = -(F["Cy"] @ sp.diags(rho_fy) @ F["Ay"])
        Krr = -self.config.pressure_stabilization * g.hx * g.hy * (self._laplacian @ sp.diags(c2))

        matrix = sp.bmat([[Axx, Axy, Bx], [Ayx, Ayy, By], [Kx, Ky, Krr]], format="lil")

        pi_bar = rho**self.spec.gamma + rho * theta
        shift = pi_bar - c2 * r_bar.ravel()
        rhs = np.concatenate([
            -(g.Dx @ shift) + self.M * fx,
            -(g.Dy @ shift) + self.M * fy,
            np.zeros(N),
        ])
        if "momentum" in self.source:
            rhs[: 2 * N] += self.source["momentum"].reshape(2 * N)
        if "continuity" in self.source:
            rhs[2 * N :] += self.source["continuity"].ravel()

        # the continuity rows sum to zero; one is traded for the mean constraint
        row = 2 * N
        matrix[row, :] = 0.0
        matrix[row, 2 * N :] = g.volume.ravel() / g.area
        rhs[row] = 0.0

        return apply_slip_bc(g, matrix.tocsr(), rhs, self.bc)

    def residual(self, r: np.ndarray, u: np.ndarray) -> float:
        """Nonlinear residual; the linearization is exact at its own expansion point."""
        matrix, rhs = self.assemble(r)
        X = np.concatenate([u[0].ravel(), u[1].ravel(), r.ravel()])
        return max_norm(matrix @ X - rhs)


def solve_flow(
    M: float,
    lam: float,
    u_bar: np.ndarray,
    theta_eff: np.ndarray,
    force: np.ndarray,
    spec: MixtureSpec,
    grid: Grid,
    config: SubsolverConfig,
    *,
    r0: Optional[np.ndarray] = None,
    u0: Optional[np.ndarray] = None,
    source: Optional[Dict[str, np.ndarray]] = None,
    traction_source: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, SubsolveReport]:
    """Solve div(rho u) = 0 and lam rho u_bar.grad u - div S + grad pi(rho, theta_eff) = rho f.

    Returns ``(r, u, report)`` with mean(r) = 0 and u.n = 0 on the walls.
    """
    if not 0.0 <= lam <= 1.0:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    if np.any(np.asarray(theta_eff) < 0.0):
        raise PreconditionError("effective temperature must be >= 0")

    system = FlowSystem(grid, M, lam, u_bar, theta_eff, force, spec, config, source, traction_source)
    N = grid.size
    r = np.zeros(grid.shape) if r0 is None else np.array(r0, dtype=float)
    u = np.zeros((2,) + grid.shape) if u0 is None else np.array(u0, dtype=float)
    history: List[float] = []
    changes: List[float] = []

    for it in range(1, config.max_picard + 1):
        matrix, rhs = system.assemble(r)
        X_cur = np.concatenate([u[0].ravel(), u[1].ravel(), r.ravel()])
        history.append(max_norm(matrix @ X_cur - rhs))
        X = solve_linear(matrix, rhs, what=f"flow Picard step {it}")
        u_new = np.stack([X[:N].reshape(grid.shape), X[N : 2 * N].reshape(grid.shape)])
        r_new = X[2 * N :].reshape(grid.shape)
        r_new = r_new - grid.mean(r_new)
        u_new = system.bc.enforce(grid, u_new)

        rho = M + r_new
        if np.any(rho <= 0.5 * M) or np.any(rho >= 1.5 * M):
            k = int(np.argmax(np.abs(r_new)))
            raise DensityExit(
                f"density {rho.ravel()[k]:.6g} left the band ({0.5 * M:g}, {1.5 * M:g})",
            )

        change = max_norm(r_new - r) + max_norm(u_new - u)
        changes.append(change)
        r, u = r_new, u_new
        scale = 1.0 + max_norm(r) + max_norm(u)
        converged = change <= config.picard_tol * scale
        if not converged and it >= 3 and change <= config.picard_stall_tol * scale:
            # updates no longer contract: round-off floor of the linear solve
            if change >= 0.5 * changes[-2]:
                logger.debug("flow: Picard update stalled at %.3e after %d steps", change, it)
                converged = True
        if converged:
            final = system.residual(r, u)
            history.append(final)
            logger.debug("flow converged in %d Picard steps (residual %.3e)", it, final)
            return r, u, SubsolveReport(
                name="flow", iterations=it, initial_residual=history[0],
                final_residual=final, converged=True, history=history,
            )

    raise NonConvergence(
        f"flow: Picard update {changes[-1]:.3e} above tolerance after {config.max_picard} steps"
    )
