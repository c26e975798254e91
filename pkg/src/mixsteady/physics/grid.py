"""Structured node grid on a rectangle with vertex-centered finite volumes.

Nodes form the (nx+1) x (ny+1) tensor grid; arrays are indexed ``[i, j]``
and flattened in C order (``k = i * (ny + 1) + j``). Each node owns a control
volume of size ``wx[i] * wy[j]`` (half widths at the ends), so boundary nodes
have half cells and corners quarter cells.

Fields may carry leading component axes (species, vector components); the
last two axes are always the spatial ones.
"""
from __future__ import annotations

import logging
import math
from functools import cached_property
from typing import Dict, Literal

import numpy as np
import scipy.sparse as sp

from mixsteady.errors import DomainError, PreconditionError
from mixsteady.physics.models import GridSpec

logger = logging.getLogger(__name__)

NormKind = Literal["Lp", "W1p", "W2p", "L2_boundary"]


def _d1_centered(n_nodes: int, h: float) -> sp.csr_matrix:
    """1-D first derivative, centered inside and one-sided second order at the ends."""
    main = np.zeros(n_nodes)
    upper = np.full(n_nodes - 1, 0.5 / h)
    lower = np.full(n_nodes - 1, -0.5 / h)
    D = sp.diags([lower, main, upper], [-1, 0, 1], format="lil")
    D[0, 0:3] = np.array([-1.5, 2.0, -0.5]) / h
    D[n_nodes - 1, n_nodes - 3 : n_nodes] = np.array([0.5, -2.0, 1.5]) / h
    return D.tocsr()


def _sbp_difference(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Centered inside, first-order one-sided at both ends."""
    f = np.moveaxis(np.asarray(f, dtype=float), axis, -1)
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    out[..., 0] = (f[..., 1] - f[..., 0]) / h
    out[..., -1] = (f[..., -1] - f[..., -2]) / h
    return np.moveaxis(out, -1, axis)


def _d1_backward(n_nodes: int, h: float) -> sp.csr_matrix:
    D = sp.diags([np.full(n_nodes - 1, -1.0 / h), np.full(n_nodes, 1.0 / h)], [-1, 0], format="lil")
    D[0, 0:2] = np.array([-1.0, 1.0]) / h
    return D.tocsr()


def _d1_forward(n_nodes: int, h: float) -> sp.csr_matrix:
    D = sp.diags([np.full(n_nodes, -1.0 / h), np.full(n_nodes - 1, 1.0 / h)], [0, 1], format="lil")
    D[n_nodes - 1, n_nodes - 2 : n_nodes] = np.array([-1.0, 1.0]) / h
    return D.tocsr()


class Grid:
    """Discrete operators, quadrature and norms for one ``GridSpec``."""

    def __init__(self, spec: GridSpec) -> None:
        self.spec = spec
        self.nx, self.ny = spec.nx, spec.ny
        self.Lx, self.Ly = spec.Lx, spec.Ly
        self.hx, self.hy = spec.hx, spec.hy
        self.shape = (self.nx + 1, self.ny + 1)
        self.size = self.shape[0] * self.shape[1]
        self.x = np.linspace(0.0, self.Lx, self.nx + 1)
        self.y = np.linspace(0.0, self.Ly, self.ny + 1)
        self.X, self.Y = np.meshgrid(self.x, self.y, indexing="ij")

        self.wx = np.full(self.nx + 1, self.hx)
        self.wx[[0, -1]] = 0.5 * self.hx
        self.wy = np.full(self.ny + 1, self.hy)
        self.wy[[0, -1]] = 0.5 * self.hy
        self.volume = np.outer(self.wx, self.wy)
        self.area = self.Lx * self.Ly

        bf = np.zeros(self.shape)
        bf[0, :] += 2.0 / self.hx
        bf[-1, :] += 2.0 / self.hx
        bf[:, 0] += 2.0 / self.hy
        bf[:, -1] += 2.0 / self.hy
        # face length per unit control volume; zero in the interior
        self.boundary_factor = bf
        self.boundary_weights = self.volume * bf
        self.boundary_mask = bf > 0.0

        # x-walls (i = 0, nx) have normal e_x, y-walls (j = 0, ny) have normal e_y
        self.on_x_wall = np.zeros(self.shape, dtype=bool)
        self.on_x_wall[[0, -1], :] = True
        self.on_y_wall = np.zeros(self.shape, dtype=bool)
        self.on_y_wall[:, [0, -1]] = True
        nrm = np.zeros((2,) + self.shape)
        nrm[0, 0, :], nrm[0, -1, :] = -1.0, 1.0
        nrm[1, :, 0], nrm[1, :, -1] = -1.0, 1.0
        self.normal = nrm

    def __repr__(self) -> str:
        return f"Grid({self.Lx:g}x{self.Ly:g}, {self.nx}x{self.ny})"

    # -- nodal differences --

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Second-order gradient; adds a component axis of length 2 before the spatial axes."""
        f = np.asarray(f, dtype=float)
        dfx, dfy = np.gradient(f, self.hx, self.hy, axis=(-2, -1), edge_order=2)
        return np.stack([dfx, dfy], axis=-3)

    def divergence(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        dvx = np.gradient(v[..., 0, :, :], self.hx, axis=-2, edge_order=2)
        dvy = np.gradient(v[..., 1, :, :], self.hy, axis=-1, edge_order=2)
        return dvx + dvy

    def dilatation(self, v: np.ndarray) -> np.ndarray:
        """div v paired with ``Dx``/``Dy`` by summation by parts.

        For v with zero normal component on the walls,
        ``integrate(f * dilatation(v)) == -integrate(v_x Dx f + v_y Dy f)`` exactly.
        """
        v = np.asarray(v, dtype=float)
        return _sbp_difference(v[..., 0, :, :], self.hx, -2) + _sbp_difference(v[..., 1, :, :], self.hy, -1)

    def hessian(self, f: np.ndarray) -> np.ndarray:
        """All second differences, shape (..., 2, 2, nx+1, ny+1)."""
        return self.gradient(self.gradient(f))

    @cached_property
    def Dx(self) -> sp.csr_matrix:
        return sp.kron(_d1_centered(self.nx + 1, self.hx), sp.identity(self.ny + 1), format="csr")

    @cached_property
    def Dy(self) -> sp.csr_matrix:
        return sp.kron(sp.identity(self.nx + 1), _d1_centered(self.ny + 1, self.hy), format="csr")

    @cached_property
    def _upwind(self) -> Dict[str, sp.csr_matrix]:
        Ix, Iy = sp.identity(self.nx + 1), sp.identity(self.ny + 1)
        return {
            "xb": sp.kron(_d1_backward(self.nx + 1, self.hx), Iy, format="csr"),
            "xf": sp.kron(_d1_forward(self.nx + 1, self.hx), Iy, format="csr"),
            "yb": sp.kron(Ix, _d1_backward(self.ny + 1, self.hy), format="csr"),
            "yf": sp.kron(Ix, _d1_forward(self.ny + 1, self.hy), format="csr"),
        }

    def advection_matrix(self, vel: np.ndarray, scheme: str = "upwind") -> sp.csr_matrix:
        """Matrix of f -> vel . grad f, first-order upwind or second-order centered."""
        vx = np.asarray(vel[0], dtype=float).ravel()
        vy = np.asarray(vel[1], dtype=float).ravel()
        if scheme == "centered":
            return (sp.diags(vx) @ self.Dx + sp.diags(vy) @ self.Dy).tocsr()
        if scheme != "upwind":
            raise PreconditionError(f"unknown convection scheme: {scheme}")
        up = self._upwind
        return (
            sp.diags(np.maximum(vx, 0.0)) @ up["xb"]
            + sp.diags(np.minimum(vx, 0.0)) @ up["xf"]
            + sp.diags(np.maximum(vy, 0.0)) @ up["yb"]
            + sp.diags(np.minimum(vy, 0.0)) @ up["yf"]
        ).tocsr()

    def advect(self, vel: np.ndarray, f: np.ndarray, scheme: str = "upwind") -> np.ndarray:
        return (self.advection_matrix(vel, scheme) @ np.asarray(f).ravel()).reshape(self.shape)

    # -- face operators (finite volume) --

    @cached_property
    def faces(self) -> Dict[str, sp.csr_matrix]:
        """Face difference, face average and face-to-node flux balance matrices.

        ``Cx @ phi`` is minus the outward x-flux balance of the face values
        ``phi`` per unit control volume, so ``Cx @ diag(a_f) @ Gx`` is the x part
        of ``-div(a grad f)`` with homogeneous Neumann data.
        """
        idx = np.arange(self.size).reshape(self.shape)
        out: Dict[str, sp.csr_matrix] = {}
        vol = self.volume.ravel()
        for axis, (h, length) in enumerate(((self.hx, self.wy[None, :]), (self.hy, self.wx[:, None]))):
            if axis == 0:
                p, q = idx[:-1, :].ravel(), idx[1:, :].ravel()
                flen = np.broadcast_to(length, (self.nx, self.ny + 1)).ravel()
            else:
                p, q = idx[:, :-1].ravel(), idx[:, 1:].ravel()
                flen = np.broadcast_to(length, (self.nx + 1, self.ny)).ravel()
            nf = p.size
            f_ids = np.arange(nf)
            G = sp.csr_matrix(
                (np.concatenate([np.full(nf, -1.0 / h), np.full(nf, 1.0 / h)]),
                 (np.concatenate([f_ids, f_ids]), np.concatenate([p, q]))),
                shape=(nf, self.size),
            )
            A = sp.csr_matrix(
                (np.full(2 * nf, 0.5), (np.concatenate([f_ids, f_ids]), np.concatenate([p, q]))),
                shape=(nf, self.size),
            )
            C = sp.csr_matrix(
                (np.concatenate([-flen / vol[p], flen / vol[q]]),
                 (np.concatenate([p, q]), np.concatenate([f_ids, f_ids]))),
                shape=(self.size, nf),
            )
            key = "xy"[axis]
            out["G" + key], out["A" + key], out["C" + key] = G, A, C
        return out

    @cached_property
    def face_areas(self) -> Dict[str, np.ndarray]:
        """Dual area a_f = h * face length per face, so ``diag(volume) C = G^T diag(a_f)``."""
        return {
            "x": self.hx * np.broadcast_to(self.wy[None, :], (self.nx, self.ny + 1)).ravel(),
            "y": self.hy * np.broadcast_to(self.wx[:, None], (self.nx + 1, self.ny)).ravel(),
        }

    @cached_property
    def cells(self) -> Dict[str, sp.csr_matrix]:
        """Cell-center x/y differences and the four-corner average, each (cells x nodes)."""
        idx = np.arange(self.size).reshape(self.shape)
        corners = [idx[:-1, :-1], idx[1:, :-1], idx[:-1, 1:], idx[1:, 1:]]
        nc = corners[0].size
        rows = np.tile(np.arange(nc), 4)
        cols = np.concatenate([c.ravel() for c in corners])

        def stencil(weights: np.ndarray) -> sp.csr_matrix:
            return sp.csr_matrix((np.repeat(weights, nc), (rows, cols)), shape=(nc, self.size))

        gx, gy = 0.5 / self.hx, 0.5 / self.hy
        return {
            "Gx": stencil(np.array([-gx, gx, -gx, gx])),
            "Gy": stencil(np.array([-gy, -gy, gy, gy])),
            "A": stencil(np.full(4, 0.25)),
        }

    def div_a_grad_matrix(self, a: np.ndarray) -> sp.csr_matrix:
        """Matrix of f -> div(a grad f) with arithmetic face averages and zero boundary flux."""
        a = self._coefficient(a)
        F = self.faces
        ax = F["Ax"] @ a
        ay = F["Ay"] @ a
        return -(F["Cx"] @ sp.diags(ax) @ F["Gx"] + F["Cy"] @ sp.diags(ay) @ F["Gy"]).tocsr()

    def div_a_grad(self, a: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Conservative div(a grad f); exact zero on constants, zero boundary flux."""
        a = self._coefficient(a).reshape(self.shape)
        f = np.asarray(f, dtype=float)
        ax = 0.5 * (a[:-1, :] + a[1:, :])
        ay = 0.5 * (a[:, :-1] + a[:, 1:])
        Fx = ax * (f[1:, :] - f[:-1, :]) / self.hx * self.wy[None, :]
        Fy = ay * (f[:, 1:] - f[:, :-1]) / self.hy * self.wx[:, None]
        out = np.zeros(self.shape)
        out[:-1, :] += Fx
        out[1:, :] -= Fx
        out[:, :-1] += Fy
        out[:, 1:] -= Fy
        return out / self.volume

    def _coefficient(self, a: np.ndarray) -> np.ndarray:
        a = np.broadcast_to(np.asarray(a, dtype=float), self.shape).ravel()
        if not np.all(a > 0.0):
            k = int(np.argmin(a))
            raise DomainError("diffusion coefficient must be > 0", node=tuple(int(i) for i in np.unravel_index(k, self.shape)))
        return a

    # -- quadrature --

    def integrate(self, f: np.ndarray) -> np.ndarray:
        """Trapezoidal integral over the rectangle (leading axes kept)."""
        return np.sum(np.asarray(f) * self.volume, axis=(-2, -1))

    def integrate_boundary(self, f: np.ndarray) -> np.ndarray:
        """Trapezoidal integral along the four sides."""
        return np.sum(np.asarray(f) * self.boundary_weights, axis=(-2, -1))

    def mean(self, f: np.ndarray) -> np.ndarray:
        return self.integrate(f) / self.area

    # -- norms --

    @staticmethod
    def magnitude(f: np.ndarray) -> np.ndarray:
        """Pointwise Euclidean magnitude over all leading component axes."""
        f = np.asarray(f, dtype=float)
        if f.ndim == 2:
            return np.abs(f)
        return np.sqrt(np.sum(f**2, axis=tuple(range(f.ndim - 2))))

    def lp(self, f: np.ndarray, p: float = 2.0) -> float:
        if not (p >= 1.0):
            raise PreconditionError(f"norm exponent must be >= 1, got {p}")
        m = self.magnitude(f)
        if math.isinf(p):
            return float(np.max(m))
        return float(self.integrate(m**p) ** (1.0 / p))

    def w1p(self, f: np.ndarray, p: float = 2.0) -> float:
        return self.lp(f, p) + self.lp(self.gradient(f), p)

    def w2p(self, f: np.ndarray, p: float = 2.0) -> float:
        return self.w1p(f, p) + self.lp(self.hessian(f), p)

    def l2_boundary(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.integrate_boundary(self.magnitude(f) ** 2)))

    def norm(self, f: np.ndarray, kind: NormKind = "Lp", p: float = 2.0) -> float:
        if kind == "Lp":
            return self.lp(f, p)
        if kind == "W1p":
            return self.w1p(f, p)
        if kind == "W2p":
            return self.w2p(f, p)
        if kind == "L2_boundary":
            return self.l2_boundary(f)
        raise PreconditionError(f"unknown norm kind: {kind}")
