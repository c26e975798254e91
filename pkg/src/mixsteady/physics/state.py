"""Discrete field state (r, u, z, w) and its derived primitives."""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from mixsteady.errors import DomainError
from mixsteady.physics.grid import Grid


class FieldState:
    """Density perturbation, velocity, log-temperature and log-mass-fractions.

    ``theta`` and ``Y`` are stored next to their logarithms so a state read
    back from primitive files reproduces the written values bit for bit.
    """

    __slots__ = ("M", "r", "u", "z", "w", "theta", "Y")

    def __init__(
        self,
        M: float,
        r: np.ndarray,
        u: np.ndarray,
        z: np.ndarray,
        w: np.ndarray,
        theta: Optional[np.ndarray] = None,
        Y: Optional[np.ndarray] = None,
    ) -> None:
        self.M = float(M)
        self.r = np.asarray(r, dtype=float)
        self.u = np.asarray(u, dtype=float)
        self.z = np.asarray(z, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.theta = np.exp(self.z) if theta is None else np.asarray(theta, dtype=float)
        self.Y = np.exp(self.w) if Y is None else np.asarray(Y, dtype=float)

    @classmethod
    def from_primitives(
        cls, M: float, r: np.ndarray, u: np.ndarray, theta: np.ndarray, Y: np.ndarray
    ) -> FieldState:
        theta = np.asarray(theta, dtype=float)
        Y = np.asarray(Y, dtype=float)
        for name, arr in (("theta", theta), ("Y", Y), ("rho", M + np.asarray(r))):
            bad = ~(arr > 0.0)
            if np.any(bad):
                raise DomainError(f"{name} must be > 0", node=tuple(int(i) for i in np.argwhere(bad)[0]))
        return cls(M, r, u, np.log(theta), np.log(Y), theta=theta, Y=Y)

    @classmethod
    def uniform(cls, grid: Grid, M: float, n: int, theta: float = 1.0, w: Optional[float] = None) -> FieldState:
        """Constant state: r = 0, u = 0, theta const, Y_k = e^w (default 1/n)."""
        w_val = np.log(1.0 / n) if w is None else w
        return cls(
            M,
            np.zeros(grid.shape),
            np.zeros((2,) + grid.shape),
            np.full(grid.shape, np.log(theta)),
            np.full((n,) + grid.shape, w_val),
        )

    @property
    def rho(self) -> np.ndarray:
        return self.M + self.r

    @property
    def n(self) -> int:
        return int(self.w.shape[0])

    @property
    def sigma_Y(self) -> np.ndarray:
        return np.sum(self.Y, axis=0)

    def copy(self) -> FieldState:
        return FieldState(
            self.M, self.r.copy(), self.u.copy(), self.z.copy(), self.w.copy(),
            theta=self.theta.copy(), Y=self.Y.copy(),
        )

    def blend(self, other: FieldState, weight: float) -> FieldState:
        """(1 - weight) * self + weight * other in the solver unknowns (r, u, z, w)."""
        if weight == 1.0:
            return other.copy()
        a = 1.0 - weight
        return FieldState(
            self.M,
            a * self.r + weight * other.r,
            a * self.u + weight * other.u,
            a * self.z + weight * other.z,
            a * self.w + weight * other.w,
        )

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in (self.r, self.u, self.z, self.w))

    def arrays(self) -> Tuple[np.ndarray, ...]:
        return self.r, self.u, self.theta, self.Y

    def __repr__(self) -> str:
        return f"FieldState(M={self.M:g}, n={self.n}, shape={self.r.shape})"
