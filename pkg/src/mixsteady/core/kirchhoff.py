"""Kirchhoff transform of the species diffusion coefficient h(w) = D0*M*e^w + eps.

``H(w) = D0M (e^w - 1) + eps w`` is the antiderivative with ``H(0) = 0``. It
maps the quasilinear operator ``div(h(w) grad w)`` to the Laplacian of ``H(w)``.
"""
from __future__ import annotations

import logging
from typing import Tuple, Union

import numpy as np

from mixsteady.errors import PreconditionError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_MAX_ITER = 200
_ROUNDOFF = 4.0 * np.finfo(float).eps


def _check(D0M: float, epsilon: float) -> None:
    if not (epsilon > 0.0):
        raise PreconditionError(f"Kirchhoff transform needs eps > 0, got {epsilon}")
    if not (D0M > 0.0):
        raise PreconditionError(f"Kirchhoff transform needs D0*M > 0, got {D0M}")


def kirchhoff(w: ArrayLike, D0M: float, epsilon: float) -> np.ndarray:
    _check(D0M, epsilon)
    w = np.asarray(w, dtype=float)
    return D0M * np.expm1(w) + epsilon * w


def kirchhoff_derivative(w: ArrayLike, D0M: float, epsilon: float) -> np.ndarray:
    """h(w) = H'(w) > 0."""
    return D0M * np.exp(np.asarray(w, dtype=float)) + epsilon


def _bracket(W: np.ndarray, D0M: float, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bounds lo <= H^-1(W) <= hi from eps*w - D0M < H(w) and the sign of w."""
    lo = np.empty_like(W)
    hi = np.empty_like(W)
    pos = W >= 0.0
    # W >= 0: 0 <= w, H(w) >= D0M (e^w - 1) and H(w) >= eps w
    lo[pos] = 0.0
    hi[pos] = np.minimum(W[pos] / epsilon, np.log1p(W[pos] / D0M))
    # W < 0: w < 0, eps w - D0M < H(w) < min(eps w, D0M (e^w - 1))
    neg = ~pos
    Wn = W[neg]
    above = Wn > -D0M
    log_lo = np.full_like(Wn, -np.inf)
    log_lo[above] = np.log1p(Wn[above] / D0M)
    lo[neg] = np.maximum(Wn / epsilon, log_lo)
    hi[neg] = np.minimum(0.0, (Wn + D0M) / epsilon)
    return lo, hi


def kirchhoff_inverse(W: ArrayLike, D0M: float, epsilon: float) -> np.ndarray:
    """w = H^-1(W) by Newton safeguarded with bisection inside a shrinking bracket.

    Iterates to round-off, so |H(H^-1(W)) - W| <= 1e-12 (1 + |W|).
    """
    _check(D0M, epsilon)
    scalar = np.ndim(W) == 0
    W = np.atleast_1d(np.asarray(W, dtype=float)).copy()
    lo, hi = _bracket(W, D0M, epsilon)

    x = np.where(W > -D0M, np.log1p(np.maximum(W, -D0M * (1.0 - 1e-12)) / D0M), (W + D0M) / epsilon)
    x = np.clip(x, lo, hi)
    active = np.ones(W.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        if not np.any(active):
            break
        xa = x[active]
        f = kirchhoff(xa, D0M, epsilon) - W[active]
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(f < 0.0, xa, lo_a)
        hi_a = np.where(f > 0.0, xa, hi_a)
        step = f / kirchhoff_derivative(xa, D0M, epsilon)
        xn = xa - step
        outside = ~((xn > lo_a) & (xn < hi_a))
        xn = np.where(outside, 0.5 * (lo_a + hi_a), xn)
        scale = _ROUNDOFF * (1.0 + np.abs(xn))
        done = (f == 0.0) | (np.abs(xn - xa) <= scale) | (hi_a - lo_a <= scale)
        x[active] = np.where(f == 0.0, xa, xn)
        lo[active], hi[active] = lo_a, hi_a
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    if np.any(active):
        logger.warning("Kirchhoff inverse stopped at %d iterations for %d values", _MAX_ITER, int(active.sum()))
    return x[0] if scalar else x


def kirchhoff_inverse_field(W: np.ndarray, D0M: float, epsilon: float) -> np.ndarray:
    return np.asarray(kirchhoff_inverse(np.ravel(W), D0M, epsilon)).reshape(np.shape(W))
