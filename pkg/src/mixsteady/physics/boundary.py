"""Boundary conditions on the rectangle.

Two conditions are used by the subsolvers:

- ``RobinBC``: heat-transfer flux ``-K grad z . n = L(z) (e^z - Theta) + eps z``
  on every boundary node of the log-temperature equation.
- ``SlipBC``: Navier slip, ``u . n = 0`` strongly and
  ``n . S . tau + f u . tau = 0`` as a traction balance on the tangential rows.

Both act on assembled (residual, matrix) pairs in the finite-volume form
``operator(f) + boundary_factor * flux = rhs`` where the boundary factor is the
face length per unit control volume.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mixsteady.physics.grid import Grid

logger = logging.getLogger(__name__)

# z -> (L(z), dL/dz)
CoefficientFn = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


class RobinBC:
    """Nonlinear Robin flux for a log-temperature unknown."""

    def __init__(
        self,
        theta_b: np.ndarray,
        epsilon: float,
        coefficient: CoefficientFn,
        boundary_source: Optional[np.ndarray] = None,
    ) -> None:
        self.theta_b = np.asarray(theta_b, dtype=float)
        self.epsilon = epsilon
        self.coefficient = coefficient
        self.boundary_source = boundary_source

    def flux(self, z: np.ndarray) -> np.ndarray:
        L, _ = self.coefficient(z)
        B = L * (np.exp(z) - self.theta_b) + self.epsilon * z
        if self.boundary_source is not None:
            B = B + self.boundary_source
        return B

    def dflux(self, z: np.ndarray) -> np.ndarray:
        L, dL = self.coefficient(z)
        ez = np.exp(z)
        return dL * (ez - self.theta_b) + L * ez + self.epsilon


def apply_robin_bc(
    grid: Grid,
    residual: np.ndarray,
    jacobian: Optional[sp.spmatrix],
    z: np.ndarray,
    bc: RobinBC,
) -> Tuple[np.ndarray, Optional[sp.csr_matrix]]:
    """Add the boundary flux balance to a residual (and its Jacobian).

    Only boundary nodes are touched; interior rows are returned unchanged.
    """
    bf = grid.boundary_factor
    residual = residual + bf * bc.flux(z)
    if jacobian is not None:
        jacobian = (jacobian + sp.diags((bf * bc.dflux(z)).ravel())).tocsr()
    return residual, jacobian


class SlipBC:
    """Navier slip on the axis-aligned walls.

    ``traction_source`` (shape (2, nx+1, ny+1)) prescribes a nonzero right-hand
    side for the tangential balance, ``n . S . tau + f u . tau = g``; used by
    manufactured-solution runs.
    """

    def __init__(self, f_fric: float, traction_source: Optional[np.ndarray] = None) -> None:
        self.f_fric = f_fric
        self.traction_source = traction_source

    @staticmethod
    def normal_masks(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes where u_x (resp. u_y) is a normal component."""
        return grid.on_x_wall, grid.on_y_wall

    @staticmethod
    def tangential_factors(grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
        """Face length per volume of the walls on which u_x (resp. u_y) is tangential."""
        fx = np.zeros(grid.shape)
        fx[:, 0] += 2.0 / grid.hy
        fx[:, -1] += 2.0 / grid.hy
        fx[grid.on_x_wall] = 0.0
        fy = np.zeros(grid.shape)
        fy[0, :] += 2.0 / grid.hx
        fy[-1, :] += 2.0 / grid.hx
        fy[grid.on_y_wall] = 0.0
        return fx, fy

    def enforce(self, grid: Grid, u: np.ndarray) -> np.ndarray:
        """Zero the normal component on every wall node."""
        u = np.array(u, dtype=float)
        mx, my = self.normal_masks(grid)
        u[0][mx] = 0.0
        u[1][my] = 0.0
        return u


def apply_slip_bc(
    grid: Grid,
    matrix: sp.spmatrix,
    rhs: np.ndarray,
    bc: SlipBC,
) -> Tuple[sp.csr_matrix, np.ndarray]:
    """Impose slip on a system whose first 2N rows are the (u_x, u_y) momentum rows.

    The tangential rows receive ``bf * f u_tau`` (the wall friction traction)
    and ``bf * g`` on the right-hand side; the normal rows are replaced by
    ``u . n = 0``.
    """
    N = grid.size
    total = matrix.shape[0]
    fx, fy = bc.tangential_factors(grid)
    friction = np.zeros(total)
    friction[:N] = bc.f_fric * fx.ravel()
    friction[N : 2 * N] = bc.f_fric * fy.ravel()
    matrix = matrix + sp.diags(friction)
    rhs = np.array(rhs, dtype=float)
    if bc.traction_source is not None:
        rhs[:N] += fx.ravel() * bc.traction_source[0].ravel()
        rhs[N : 2 * N] += fy.ravel() * bc.traction_source[1].ravel()

    mx, my = bc.normal_masks(grid)
    replace = np.zeros(total, dtype=bool)
    replace[:N] = mx.ravel()
    replace[N : 2 * N] = my.ravel()
    keep = (~replace).astype(float)
    matrix = (sp.diags(keep) @ matrix + sp.diags(replace.astype(float))).tocsr()
    rhs[replace] = 0.0
    return matrix, rhs
