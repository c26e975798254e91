"""Species subsolver in log mass fractions w_k = log Y_k.

For every species the discrete residual is

    eps w - div(D_lam grad e^w) - eps div(grad w) + delta e^w - delta/n
        + lam rho u_bar.grad(e^w_bar) / g - lam rho omega_k(e^w, e^z_bar) = 0

with zero normal flux on the whole boundary. The production rates are taken
at the unknown mass fractions, which couples the species whenever lambda > 0.

At lambda = 0 the diffusion coefficient is D0 M e^w + eps and each equation
is first solved for the Kirchhoff variable W = H(w), where it becomes a plain
Laplacian; a direct Newton solve in w then polishes the result.
"""
from __future__ import annotations

import logging
from typing import List, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from mixsteady.core.kirchhoff import kirchhoff, kirchhoff_derivative, kirchhoff_inverse_field
from mixsteady.core.newton import max_norm, newton_solve
from mixsteady.core.reports import SubsolveReport
from mixsteady.errors import OverflowGuard, PreconditionError
from mixsteady.physics.grid import Grid
from mixsteady.physics.mixture import affinities, production_rates
from mixsteady.physics.models import MixtureSpec, SubsolverConfig

logger = logging.getLogger(__name__)

SpeciesMethod = Literal["auto", "kirchhoff", "newton"]


class SpeciesEquation:
    """Residual and Jacobian of one species equation, everything but w frozen."""

    def __init__(
        self,
        grid: Grid,
        D_lambda: np.ndarray,
        epsilon: float,
        delta: float,
        n: int,
        explicit: np.ndarray,
    ) -> None:
        self.grid = grid
        self.epsilon = epsilon
        self.delta = delta
        self.n = n
        self.L_D = grid.div_a_grad_matrix(D_lambda)
        self.L_1 = grid.div_a_grad_matrix(np.ones(grid.shape))
        # lambda terms minus any manufactured forcing
        self.explicit = np.asarray(explicit, dtype=float).ravel()

    def residual(self, w: np.ndarray) -> np.ndarray:
        ew = np.exp(w)
        eps, delta = self.epsilon, self.delta
        return (
            eps * w - self.L_D @ ew - eps * (self.L_1 @ w) + delta * ew - delta / self.n + self.explicit
        )

    def jacobian(self, w: np.ndarray) -> sp.csr_matrix:
        ew = np.exp(w)
        eps = self.epsilon
        diag = sp.diags(eps + self.delta * ew)
        return (diag - self.L_D @ sp.diags(ew) - eps * self.L_1).tocsr()

    # -- Kirchhoff form, valid when D_lambda is the constant D0 M --

    def kirchhoff_residual(self, W: np.ndarray, D0M: float) -> np.ndarray:
        w = kirchhoff_inverse_field(W, D0M, self.epsilon)
        return self.epsilon * w - self.L_1 @ W + self.delta * np.exp(w) - self.delta / self.n + self.explicit

    def kirchhoff_jacobian(self, W: np.ndarray, D0M: float) -> sp.csr_matrix:
        w = kirchhoff_inverse_field(W, D0M, self.epsilon)
        d = (self.epsilon + self.delta * np.exp(w)) / kirchhoff_derivative(w, D0M, self.epsilon)
        return (sp.diags(d) - self.L_1).tocsr()


def species_explicit_terms(
    lam: float,
    rho: np.ndarray,
    u_bar: np.ndarray,
    theta_bar: np.ndarray,
    w_bar: np.ndarray,
    g_val: float,
    spec: MixtureSpec,
    grid: Grid,
    scheme: str,
) -> np.ndarray:
    """Frozen advection lam rho u_bar.grad(Y_bar_k)/g, shape (n, nx+1, ny+1)."""
    n = w_bar.shape[0]
    out = np.zeros((n,) + grid.shape)
    if lam == 0.0:
        return out
    Y_bar = np.exp(w_bar)
    adv = grid.advection_matrix(u_bar, scheme)
    for k in range(n):
        out[k] = lam * rho * (adv @ Y_bar[k].ravel()).reshape(grid.shape) / g_val
    return out


class ReactingSpecies:
    """All n species at lambda > 0, with the production rates taken at the unknown mass fractions.

    The clamp factor s(v) is frozen in the Jacobian; within the clamp the
    rates are linear in w, so the Jacobian is exact there.
    """

    def __init__(
        self,
        equations: List[SpeciesEquation],
        lam: float,
        rho: np.ndarray,
        theta_bar: np.ndarray,
        spec: MixtureSpec,
        grid: Grid,
    ) -> None:
        self.equations = equations
        self.lam = lam
        self.rho = np.broadcast_to(np.asarray(rho, dtype=float), grid.shape)
        self.theta_bar = np.asarray(theta_bar, dtype=float)
        self.spec = spec
        self.shape = (len(equations),) + grid.shape
        n = len(equations)
        self._centering = np.eye(n) - np.full((n, n), 1.0 / n)

    def _split(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self.shape)

    def residual(self, x: np.ndarray) -> np.ndarray:
        w = self._split(x)
        omega = production_rates(self.theta_bar, np.exp(w), self.spec)
        parts = [
            eq.residual(w[k].ravel()) - (self.lam * self.rho * omega[k]).ravel()
            for k, eq in enumerate(self.equations)
        ]
        return np.concatenate(parts)

    def jacobian(self, x: np.ndarray) -> sp.csr_matrix:
        w = self._split(x)
        blocks = sp.block_diag([eq.jacobian(w[k].ravel()) for k, eq in enumerate(self.equations)])
        v = affinities(self.theta_bar, np.exp(w), self.spec)
        vmax = np.max(np.abs(v), axis=0)
        s = np.minimum(1.0, self.spec.B_omega / np.maximum(vmax, 1e-300))
        chem = sp.kron(self._centering, sp.diags((self.lam * self.rho * self.spec.Lambda * s).ravel()))
        return (blocks + chem).tocsr()


def solve_species(
    lam: float,
    rho: np.ndarray,
    u_bar: np.ndarray,
    theta_bar: np.ndarray,
    w_bar: np.ndarray,
    epsilon: float,
    delta: float,
    g_val: float,
    spec: MixtureSpec,
    grid: Grid,
    config: SubsolverConfig,
    *,
    w0: Optional[np.ndarray] = None,
    source: Optional[np.ndarray] = None,
    method: SpeciesMethod = "auto",
    M: Optional[float] = None,
) -> Tuple[np.ndarray, List[SubsolveReport]]:
    """Solve the n species equations; returns ``(w, reports)`` with w of shape (n, nx+1, ny+1).

    At lambda = 0 the species decouple: ``method="kirchhoff"`` stops after
    the transformed solve, ``"newton"`` skips it, ``"auto"`` chains both.
    At lambda > 0 the production rates couple the species and one Newton
    solve covers all of them.
    ``M`` defaults to the mean of ``rho``.
    """
    if not (epsilon > 0.0 and delta > 0.0):
        raise PreconditionError(f"species solve needs eps, delta > 0 (got {epsilon:g}, {delta:g})")
    if g_val < 1.0:
        raise PreconditionError(f"cap value must be >= 1, got {g_val}")
    if method == "kirchhoff" and lam != 0.0:
        raise PreconditionError("the Kirchhoff path applies to lambda = 0 only")

    w_bar = np.asarray(w_bar, dtype=float)
    n = w_bar.shape[0]
    rho = np.asarray(rho, dtype=float)
    if M is None:
        M = float(grid.mean(rho))
    explicit = species_explicit_terms(lam, rho, u_bar, theta_bar, w_bar, g_val, spec, grid, config.convection)
    if source is not None:
        explicit = explicit - source
    start = w_bar if w0 is None else np.asarray(w0, dtype=float)
    guard = config.exp_guard
    D_lambda = spec.D0 * (M + lam * (rho - M)) if lam != 0.0 else np.full(grid.shape, spec.D0 * M)
    equations = [SpeciesEquation(grid, D_lambda, epsilon, delta, n, explicit[k]) for k in range(n)]

    if lam != 0.0:
        system = ReactingSpecies(equations, lam, rho, theta_bar, spec, grid)
        x, rep = newton_solve(system.residual, system.jacobian, start.ravel(), config, name="species", guard=guard)
        logger.debug("species solved (lam=%g, delta=%g, eps=%g)", lam, delta, epsilon)
        return x.reshape(start.shape), [rep]

    w_out = np.empty_like(start)
    reports: List[SubsolveReport] = []
    for k, eq in enumerate(equations):
        w = start[k].ravel()

        if method in ("auto", "kirchhoff"):
            a = spec.D0 * M
            W0 = kirchhoff(w, a, epsilon)
            W, rep = newton_solve(
                lambda W_: eq.kirchhoff_residual(W_, a),
                lambda W_: eq.kirchhoff_jacobian(W_, a),
                W0, config, name=f"species[{k}] kirchhoff",
            )
            reports.append(rep)
            w = kirchhoff_inverse_field(W, a, epsilon)
            if max_norm(w) > guard:
                raise OverflowGuard(f"species[{k}]: log mass fraction beyond +/-{guard:g}")

        if method != "kirchhoff":
            w, rep = newton_solve(eq.residual, eq.jacobian, w, config, name=f"species[{k}]", guard=guard)
            reports.append(rep)
        w_out[k] = w.reshape(grid.shape)

    logger.debug("species solved (lam=%g, delta=%g, eps=%g)", lam, delta, epsilon)
    return w_out, reports
