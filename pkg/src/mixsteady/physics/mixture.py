"""Pointwise constitutive closures of the mixture.

Every function is vectorized: scalars, or arrays over grid nodes. Species
quantities carry the species index on axis 0, so ``Y`` has shape ``(n, ...)``.
"""
from __future__ import annotations

import logging
from typing import Dict, Tuple, Union

import numpy as np

from mixsteady.errors import DomainError, PreconditionError
from mixsteady.physics.models import MixtureSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class ThermoPoint:
    """Density, temperature and mass fractions at one or many points."""

    __slots__ = ("rho", "theta", "Y")

    def __init__(self, rho: ArrayLike, theta: ArrayLike, Y: ArrayLike) -> None:
        self.rho = np.asarray(rho, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.Y = np.asarray(Y, dtype=float)

    def validate(self) -> ThermoPoint:
        _require_positive(self.rho, "rho")
        _require_positive(self.theta, "theta")
        _require_positive(self.Y, "Y")
        return self


def _require_positive(a: np.ndarray, name: str) -> None:
    bad = ~(np.asarray(a) > 0.0)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DomainError(f"{name} must be > 0", node=idx)


def _cv_column(spec: MixtureSpec, like: np.ndarray) -> np.ndarray:
    """c_v reshaped to broadcast against an (n, ...) species array."""
    return spec.cv.reshape((spec.n,) + (1,) * (like.ndim - 1))


# -- thermodynamics --


def pressure(pt: ThermoPoint, spec: MixtureSpec) -> np.ndarray:
    """Cold plus molecular pressure, rho^gamma + rho*theta."""
    return pt.rho**spec.gamma + pt.rho * pt.theta


def internal_energy(pt: ThermoPoint, spec: MixtureSpec) -> np.ndarray:
    """rho^(gamma-1)/(gamma-1) + theta * sum_k c_vk Y_k."""
    cold = pt.rho ** (spec.gamma - 1.0) / (spec.gamma - 1.0)
    return cold + pt.theta * np.sum(_cv_column(spec, pt.Y) * pt.Y, axis=0)


def entropy_gibbs(
    pt: ThermoPoint, spec: MixtureSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Species entropies, mixture entropy, enthalpies and Gibbs functions.

    Returns ``(s_k, s, h_k, g_k, g)``.
    """
    _require_positive(pt.theta, "theta")
    _require_positive(pt.rho * pt.Y, "rho*Y")
    cv = _cv_column(spec, pt.Y)
    s_k = cv * np.log(pt.theta) - np.log(pt.rho * pt.Y)
    s = np.sum(pt.Y * s_k, axis=0)
    h_k = (cv + 1.0) * pt.theta
    g_k = h_k - pt.theta * s_k
    g = np.sum(pt.Y * g_k, axis=0)
    return s_k, s, h_k, g_k, g


def affinities(theta: ArrayLike, Y: ArrayLike, spec: MixtureSpec) -> np.ndarray:
    """v_k = (g_k - mean_j g_j) / theta.

    The theta*log(rho) part of g_k is common to all species and cancels, so
    v does not depend on rho.
    """
    theta = np.asarray(theta, dtype=float)
    Y = np.asarray(Y, dtype=float)
    _require_positive(theta, "theta")
    _require_positive(Y, "Y")
    cv = _cv_column(spec, Y)
    reduced = (cv + 1.0) - cv * np.log(theta) + np.log(Y)
    return reduced - np.mean(reduced, axis=0)


def production_rates(theta: ArrayLike, Y: ArrayLike, spec: MixtureSpec) -> np.ndarray:
    """Bounded affinity model omega_k = -Lambda * s(v) * v_k.

    s(v) = min(1, B_omega / max_k |v_k|) rescales all species uniformly. The
    last rate is closed as minus the running sum of the others, so the
    sequential sum over species is exactly zero.
    """
    v = affinities(theta, Y, spec)
    vmax = np.max(np.abs(v), axis=0)
    with np.errstate(divide="ignore"):
        scale = np.where(vmax > spec.B_omega, spec.B_omega / np.where(vmax > 0, vmax, 1.0), 1.0)
    omega = -spec.Lambda * scale * v
    running = np.array(omega[0])
    for k in range(1, spec.n - 1):
        running = running + omega[k]
    omega[spec.n - 1] = -running
    return omega


# -- transport --


def transport_coefficients(pt: ThermoPoint, spec: MixtureSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Physical (kappa, D, L), all proportional to rho."""
    growth = 1.0 + pt.theta ** spec.alpha
    kappa = spec.kappa0 * pt.rho * growth
    D = spec.D0 * pt.rho * np.ones_like(pt.theta)
    L = spec.L0 * pt.rho * growth
    return kappa, D, L


def blended_coefficients(
    pt: ThermoPoint, M: float, lam: float, spec: MixtureSpec
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Affine blends between the constant-density anchor (lam=0) and the physical closures."""
    if not 0.0 <= lam <= 1.0:
        raise PreconditionError(f"lambda must lie in [0, 1], got {lam}")
    kappa, D, L = transport_coefficients(pt, spec)
    growth = 1.0 + pt.theta ** spec.alpha
    kappa_anchor = spec.kappa0 * M * growth
    D_anchor = spec.D0 * M * np.ones_like(pt.theta)
    L_anchor = spec.L0 * M * growth
    return (
        kappa_anchor + lam * (kappa - kappa_anchor),
        D_anchor + lam * (D - D_anchor),
        L_anchor + lam * (L - L_anchor),
    )


def viscous_stress(rho: ArrayLike, grad_u: np.ndarray) -> np.ndarray:
    """S = 2 rho D(u) for grad_u of shape (2, 2, ...) with grad_u[a, b] = d u_a / d x_b."""
    grad_u = np.asarray(grad_u, dtype=float)
    return np.asarray(rho) * (grad_u + np.swapaxes(grad_u, 0, 1))


def double_dot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.sum(A * B, axis=(0, 1))


def fluxes(
    pt: ThermoPoint,
    grads: Dict[str, np.ndarray],
    spec: MixtureSpec,
    *,
    D_lambda: ArrayLike = 0.0,
    epsilon: float = 0.0,
    delta: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Physical and regularized fluxes.

    ``grads`` holds ``"theta"`` with shape (2, ...) and ``"Y"`` with shape
    (n, 2, ...). Returns ``(F_k, q, Q, J_k)``:

        F_k = -D grad Y_k,  q = -kappa grad theta,  Q = q + sum_k h_k F_k,
        J_k = -(D_lambda + (epsilon + delta Y_k) / Y_k) grad Y_k.
    """
    kappa, D, _ = transport_coefficients(pt, spec)
    grad_theta = np.asarray(grads["theta"], dtype=float)
    grad_Y = np.asarray(grads["Y"], dtype=float)
    F = -D * grad_Y
    q = -kappa * grad_theta
    h = (_cv_column(spec, pt.Y) + 1.0) * pt.theta
    Q = q + np.sum(h[:, None] * F, axis=0)
    _require_positive(pt.Y, "Y")
    coeff = np.asarray(D_lambda) + (epsilon + delta * pt.Y) / pt.Y
    J = -coeff[:, None] * grad_Y
    return F, q, Q, J


def cap_function(x: float, C0: float) -> float:
    """g = max(1, x / C0)."""
    return max(1.0, float(x) / C0)
