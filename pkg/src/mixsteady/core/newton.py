"""Damped Newton iteration with backtracking line search, shared by the subsolvers."""
from __future__ import annotations

import logging
import warnings
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from mixsteady.core.reports import SubsolveReport
from mixsteady.errors import NonConvergence, OverflowGuard, SingularLinearSystem
from mixsteady.physics.models import SubsolverConfig

logger = logging.getLogger(__name__)

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], sp.spmatrix]

# residuals within this factor of the target count as round-off level
_ROUNDOFF_BAND = 1e3


def solve_linear(matrix: sp.spmatrix, rhs: np.ndarray, what: str = "linear system") -> np.ndarray:
    """Sparse direct solve; rank-deficient or non-finite results raise."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(sp.csc_matrix(matrix), rhs)
        except (spla.MatrixRankWarning, RuntimeError) as e:
            raise SingularLinearSystem(f"{what}: {e}") from None
    x = np.asarray(x)
    if not np.all(np.isfinite(x)):
        raise SingularLinearSystem(f"{what}: non-finite solution")
    return x


def max_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def newton_solve(
    residual: ResidualFn,
    jacobian: JacobianFn,
    x0: np.ndarray,
    config: SubsolverConfig,
    name: str,
    guard: Optional[float] = None,
) -> Tuple[np.ndarray, SubsolveReport]:
    """Solve residual(x) = 0 from x0.

    Converged when ``|F|_inf <= newton_tol * (1 + |F0|_inf)`` or when the
    accepted step falls below ``step_tol * (1 + |x|_inf)`` (round-off floor).
    ``guard`` bounds |x| for unknowns that appear in exponents; trial points
    beyond it are backtracked, and if every trial violates it the solve
    raises ``OverflowGuard``.
    """
    x = np.array(x0, dtype=float)
    if guard is not None and max_norm(x) > guard:
        raise OverflowGuard(f"{name}: initial guess beyond +/-{guard:g}")
    F = residual(x)
    res0 = max_norm(F)
    if not np.isfinite(res0):
        raise NonConvergence(f"{name}: non-finite initial residual")
    history: List[float] = [res0]
    target = config.newton_tol * (1.0 + res0)
    if res0 <= target:
        return x, SubsolveReport(name=name, iterations=0, initial_residual=res0,
                                 final_residual=res0, converged=True, history=history)

    res = res0
    for it in range(1, config.max_newton + 1):
        dx = solve_linear(jacobian(x), -F, what=f"{name} Newton step {it}")

        best: Optional[Tuple[np.ndarray, np.ndarray, float, float]] = None
        accepted = False
        all_guarded = True
        t = 1.0
        for _ in range(config.max_backtrack):
            cand = x + t * dx
            if guard is not None and max_norm(cand) > guard:
                t *= config.backtrack
                continue
            all_guarded = False
            F_c = residual(cand)
            r_c = max_norm(F_c)
            if np.isfinite(r_c) and (best is None or r_c < best[2]):
                best = (cand, F_c, r_c, t)
            if np.isfinite(r_c) and r_c <= (1.0 - 1e-4 * t) * res:
                accepted = True
                break
            t *= config.backtrack

        if best is None:
            if all_guarded:
                raise OverflowGuard(f"{name}: exponent argument beyond +/-{guard:g}")
            raise NonConvergence(f"{name}: non-finite residual along the Newton direction")
        if not accepted:
            # near the target the residual only moves by round-off
            log = logger.debug if best[2] <= _ROUNDOFF_BAND * target else logger.warning
            log("%s: line search exhausted at iteration %d (res=%.3e)", name, it, res)

        x, F, res, t_used = best
        history.append(res)
        step = t_used * max_norm(dx)
        if res <= target or step <= config.step_tol * (1.0 + max_norm(x)):
            logger.debug("%s converged in %d iterations (res %.3e -> %.3e)", name, it, res0, res)
            return x, SubsolveReport(name=name, iterations=it, initial_residual=res0,
                                     final_residual=res, converged=True, history=history)

    raise NonConvergence(
        f"{name}: residual {res:.3e} above tolerance {target:.3e} after {config.max_newton} iterations"
    )
