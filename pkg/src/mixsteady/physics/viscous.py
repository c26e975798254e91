"""Discrete viscous stress: the momentum operator and the dissipation it produces.

The operator is the derivative of the discrete stress work

    W(u) = sum_xfaces 2 a rho (d_x u_x)^2 + sum_yfaces 2 a rho (d_y u_y)^2
         + sum_cells a rho (d_y u_x + d_x u_y)^2

with the normal strains on the finite-volume faces and the shear strain at
cell centers. ``u . volume * A u`` summed over the nodes is W(u), and
spreading each face and cell term onto its corner nodes gives a nonnegative
nodal density whose trapezoidal integral is W(u) exactly. The heat source and
the entropy production use that density, so the total energy balance sees the
same dissipation the momentum equation does.
"""
from __future__ import annotations

from typing import Tuple

import numpy as np
import scipy.sparse as sp

from mixsteady.physics.grid import Grid


def _weights(grid: Grid, rho: np.ndarray) -> Tuple[sp.dia_matrix, sp.dia_matrix, sp.dia_matrix]:
    F, C = grid.faces, grid.cells
    rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape).ravel()
    areas = grid.face_areas
    wx = sp.diags(areas["x"] * (F["Ax"] @ rho))
    wy = sp.diags(areas["y"] * (F["Ay"] @ rho))
    wc = sp.diags(grid.hx * grid.hy * (C["A"] @ rho))
    return wx, wy, wc


def viscous_blocks(
    grid: Grid, rho: np.ndarray
) -> Tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """(A_xx, A_xy, A_yx, A_yy) of u -> -div S(rho, grad u) per unit control volume.

    Zero traction on the walls; the slip condition adds the friction and any
    prescribed traction afterwards.
    """
    F, C = grid.faces, grid.cells
    wx, wy, wc = _weights(grid, rho)
    inv_vol = sp.diags(1.0 / grid.volume.ravel())
    Gx, Gy, Sx, Sy = F["Gx"], F["Gy"], C["Gx"], C["Gy"]
    Axx = inv_vol @ (2.0 * (Gx.T @ wx @ Gx) + Sy.T @ wc @ Sy)
    Axy = inv_vol @ (Sy.T @ wc @ Sx)
    Ayx = inv_vol @ (Sx.T @ wc @ Sy)
    Ayy = inv_vol @ (2.0 * (Gy.T @ wy @ Gy) + Sx.T @ wc @ Sx)
    return Axx.tocsr(), Axy.tocsr(), Ayx.tocsr(), Ayy.tocsr()


def viscous_dissipation(grid: Grid, rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Nodal S:grad u consistent with ``viscous_blocks``; nonnegative."""
    F, C = grid.faces, grid.cells
    wx, wy, wc = _weights(grid, rho)
    ux = np.asarray(u[0], dtype=float).ravel()
    uy = np.asarray(u[1], dtype=float).ravel()
    normal_x = 2.0 * wx.diagonal() * (F["Gx"] @ ux) ** 2
    normal_y = 2.0 * wy.diagonal() * (F["Gy"] @ uy) ** 2
    shear = wc.diagonal() * (C["Gy"] @ ux + C["Gx"] @ uy) ** 2
    nodal = F["Ax"].T @ normal_x + F["Ay"].T @ normal_y + C["A"].T @ shear
    return (nodal / grid.volume.ravel()).reshape(grid.shape)
