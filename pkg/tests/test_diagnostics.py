"""Tests for the balance residuals, entropy production and bound ledger."""
from __future__ import annotations

import numpy as np
import pytest

from mixsteady.core.diagnostics import (
    SIGMA_TERMS,
    diagnose,
    entropy_production,
    entropy_terms,
    mark_independence,
    mass_defect,
    regularization_dissipation,
    xi_components,
)
from mixsteady.core.homotopy import anchor_state
from mixsteady.core.reports import SweepRow
from mixsteady.errors import DomainError, PreconditionError
from mixsteady.physics.models import ProblemConfig
from mixsteady.physics.problem import Problem
from mixsteady.physics.state import FieldState
from tests.conftest import trivial_raw


@pytest.fixture
def reacting_problem() -> Problem:
    return Problem(ProblemConfig.model_validate(trivial_raw(mixture={"Lambda": 1.0})), digest="test")


def _smooth_state(grid, n, M=100.0, seed=7):
    rng = np.random.default_rng(seed)
    X, Y = grid.X, grid.Y
    a = rng.uniform(0.1, 0.5, size=6)
    r = a[0] * np.cos(np.pi * X) * np.cos(np.pi * Y)
    u = np.stack([a[1] * np.sin(np.pi * X) * Y, a[2] * X * np.sin(np.pi * Y)])
    theta = 1.0 + a[3] * np.sin(2.0 * X + Y)
    weights = np.stack([1.0 + a[4] * np.cos((k + 1) * X + Y) for k in range(n)])
    Y_frac = weights / weights.sum(axis=0)
    return FieldState.from_primitives(M, r, u, theta, Y_frac)


def test_uniform_equilibrium_balances_exactly(reacting_problem):
    state = anchor_state(reacting_problem)
    report = diagnose(state, reacting_problem, 0.1)
    assert report.sigma_integral == 0.0
    assert abs(report.entropy_balance_residual) <= 1e-12
    assert abs(report.total_energy_residual) <= 1e-12
    assert all(abs(c) <= 1e-14 for c in report.compat)
    assert report.mass_defect_l2 == pytest.approx(0.0, abs=1e-15)


def test_entropy_terms_are_nonnegative(grid, spec):
    state = _smooth_state(grid, spec.n)
    terms = entropy_terms(state, spec, grid)
    assert set(terms) == set(SIGMA_TERMS)
    for name, values in terms.items():
        scale = max(1.0, float(np.max(np.abs(values))))
        assert np.min(values) >= -1e-12 * scale, name
    sigma, sigma_min = entropy_production(state, spec, grid)
    assert sigma_min == float(np.min(sigma))
    assert grid.integrate(sigma) > 0.0


def test_regularization_dissipation_nonnegative(grid, spec):
    state = _smooth_state(grid, spec.n, seed=11)
    assert np.all(regularization_dissipation(state, spec, grid, 0.05) >= 0.0)


def test_diagnose_ledger_and_xi(reacting_problem):
    state = _smooth_state(reacting_problem.grid, 2)
    report = diagnose(state, reacting_problem, 0.1)
    keys = [e.key for e in report.ledger]
    assert len(keys) == 14
    assert {"apriori1", "xi_regime", "sigma_y", "sum_flux", "entropy_sign"} <= set(keys)
    assert report.xi_over_M == report.xi / state.M
    parts = xi_components(state, reacting_problem.grid, 2.0, reacting_problem.params.p)
    assert report.ledger_value("xi_r") == parts["r"]
    assert report.epsilon == 0.1**3
    assert "sigma_field" not in report.model_dump()


def test_mass_defect_of_normalized_fractions(grid, spec):
    l2, w12 = mass_defect(_smooth_state(grid, spec.n), grid)
    assert l2 < 1e-14
    assert w12 < 1e-12


def test_xi_requires_p_above_three(grid):
    state = FieldState.uniform(grid, 100.0, 2)
    with pytest.raises(PreconditionError):
        xi_components(state, grid, 2.0, 3.0)


def test_nonpositive_fraction_raises_with_node(grid, spec):
    state = FieldState.uniform(grid, 100.0, spec.n)
    Y = state.Y.copy()
    Y[1, 2, 3] = 0.0
    broken = FieldState(state.M, state.r, state.u, state.z, state.w, Y=Y)
    with pytest.raises(DomainError) as exc:
        entropy_terms(broken, spec, grid)
    assert exc.value.node[-2:] == (2, 3)


def _row(value, apriori, status="ok"):
    return SweepRow(axis="M", value=value, status=status, ledger={"apriori1": apriori})


@pytest.mark.parametrize(
    "rows,expected",
    [
        ([_row(10, 1.0), _row(100, 1.1)], True),
        ([_row(10, 1.0), _row(100, 2.0)], False),
        ([_row(10, 1.0)], None),
        ([_row(10, 1.0), _row(100, 50.0, status="failed: DensityExit"), _row(1000, 1.05)], False),
    ],
)
def test_mark_independence(rows, expected):
    assert mark_independence(rows) == {"apriori1": expected}
