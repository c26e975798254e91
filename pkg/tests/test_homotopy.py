"""Tests for the fixed-point construction over lambda and delta."""
from __future__ import annotations

import numpy as np
import pytest

import mixsteady.core.homotopy as homotopy
from mixsteady.core.homotopy import (
    anchor_state,
    apply_F_lambda,
    check_membership,
    composite_norm,
    run_construction,
    solve_at,
)
from mixsteady.core.mms import species_constant_root, thermal_constant_root
from mixsteady.errors import MaxIterations, NonConvergence, PreconditionError
from mixsteady.physics.models import ProblemConfig
from mixsteady.physics.problem import Problem
from mixsteady.physics.state import FieldState
from tests.conftest import CONFIG_DIR, trivial_raw


def _perturbed(problem, rng, scale=0.05):
    base = anchor_state(problem)
    shape = problem.grid.shape
    return FieldState(
        base.M,
        rng.normal(scale=scale, size=shape),
        rng.normal(scale=scale, size=(2,) + shape),
        base.z + rng.normal(scale=scale, size=shape),
        base.w + rng.normal(scale=scale, size=base.w.shape),
    )


def test_anchor_map_ignores_barred_state(trivial_problem, rng):
    a, _, _ = apply_F_lambda(_perturbed(trivial_problem, rng), 0.0, 0.1, trivial_problem)
    b, _, _ = apply_F_lambda(_perturbed(trivial_problem, rng), 0.0, 0.1, trivial_problem)
    for x, y in zip(a.arrays(), b.arrays()):
        np.testing.assert_array_equal(x, y)
    assert composite_norm(a, b, trivial_problem.grid, 2.0, 4.0) == 0.0


def test_anchor_stage_needs_at_most_two_applications(trivial_problem, rng):
    _, record = solve_at(0.0, 0.1, _perturbed(trivial_problem, rng), trivial_problem)
    assert record.iterations <= 2
    assert record.update_history[-1] <= trivial_problem.params.fp_tol


def test_lambda_outside_unit_interval(trivial_problem):
    with pytest.raises(PreconditionError):
        apply_F_lambda(anchor_state(trivial_problem), 1.5, 0.1, trivial_problem)


def test_trivial_construction_matches_scalar_oracles(trivial_problem):
    state, report = run_construction(trivial_problem)
    params = trivial_problem.params
    delta = params.delta_schedule[-1]
    eps = params.epsilon(delta)

    assert report.completed
    assert report.final_g_val == 1.0
    assert len(report.stages) == len(params.delta_schedule) * len(params.lambdas)
    assert [s.delta for s in report.final_stages()] == params.delta_schedule
    assert [p.delta for p in report.defect_trace] == params.delta_schedule

    np.testing.assert_allclose(state.r, 0.0, atol=1e-10)
    np.testing.assert_allclose(state.u, 0.0, atol=1e-10)
    z_root = thermal_constant_root(1.0, eps, trivial_problem.spec.L0, params.M)
    w_root = species_constant_root(eps, delta, trivial_problem.spec.n)
    assert np.max(np.abs(state.z - z_root)) <= 1e-8
    assert np.max(np.abs(state.w - w_root)) <= 1e-8
    assert all(s.g_val == 1.0 for s in report.stages)


def test_stage_callback_sees_every_stage(trivial_problem):
    seen = []
    _, report = run_construction(trivial_problem, on_stage=lambda rec: seen.append((rec.lam, rec.delta)))
    assert seen == [(s.lam, s.delta) for s in report.stages]


def test_mean_density_below_minimum_refused(mocker):
    problem = Problem(ProblemConfig.model_validate(trivial_raw(continuation={"M": 5.0, "M_min": 10.0})))
    spy = mocker.patch.object(homotopy, "solve_at")
    with pytest.raises(PreconditionError, match="below the configured minimum"):
        run_construction(problem)
    spy.assert_not_called()


def test_failure_carries_stage_and_partial_report(trivial_problem, mocker):
    real = homotopy.apply_F_lambda

    def failing(state_bar, lam, delta, problem):
        if lam > 0.0:
            raise NonConvergence("flow: stuck")
        return real(state_bar, lam, delta, problem)

    mocker.patch.object(homotopy, "apply_F_lambda", side_effect=failing)
    with pytest.raises(NonConvergence) as exc:
        run_construction(trivial_problem)
    err = exc.value
    assert err.stage == (0.5, 0.1)
    assert err.exit_code == 3
    assert "lambda=0.5" in str(err)
    assert err.report is not None
    assert not err.report.completed
    assert [s.lam for s in err.report.stages] == [0.0]
    assert err.report.failure == str(err)


def test_fixed_point_iteration_cap(trivial_problem):
    problem = trivial_problem.with_config(
        trivial_problem.config.with_updates(continuation={"max_fp": 1, "fp_tol": 1e-300})
    )
    with pytest.raises(MaxIterations) as exc:
        solve_at(0.5, 0.1, _perturbed(problem, np.random.default_rng(1), scale=0.01), problem)
    assert exc.value.stage == (0.5, 0.1)


def test_membership_reports_four_sets(trivial_problem):
    state = anchor_state(trivial_problem)
    report = check_membership(state, trivial_problem.grid, trivial_problem.params, 2.0)
    assert [s.name for s in report.sets] == ["M_u", "M_r", "M_theta", "M_Y"]
    assert report.all_hold
    assert report.verdict("M_u").checks[0].value == 0.0


def test_membership_flags_large_velocity(trivial_problem):
    state = anchor_state(trivial_problem)
    grid = trivial_problem.grid
    big = FieldState(state.M, state.r, np.stack([100.0 * grid.X * grid.Y, np.zeros(grid.shape)]), state.z, state.w)
    report = check_membership(big, grid, trivial_problem.params, 2.0)
    assert not report.verdict("M_u").holds
    assert report.verdict("M_Y").holds


def test_underflowing_regularization_refused(mocker):
    problem = Problem(ProblemConfig.model_validate(trivial_raw(continuation={"delta_schedule": [1e-110]})))
    spy = mocker.patch.object(homotopy, "solve_at")
    with pytest.raises(PreconditionError, match="underflows"):
        run_construction(problem)
    spy.assert_not_called()


def test_reacting_smoke_construction_balances(smoke_problem):
    assert smoke_problem.spec.Lambda > 0.0
    state, report = run_construction(smoke_problem)
    assert report.completed
    assert report.final_g_val == 1.0
    assert state.is_finite()
    final = report.stages[-1].diagnostics
    assert final.sigma_min >= -1e-12
    assert abs(final.total_energy_residual) <= 1e-6
    assert abs(final.entropy_balance_residual) <= 1e-6


@pytest.mark.slow
def test_shipped_smoke_problem_end_to_end():
    problem = Problem.from_path(CONFIG_DIR / "smoke.yml")
    state, report = run_construction(problem)
    assert report.completed
    assert report.final_g_val == 1.0
    assert state.r.shape == (65, 65)
    final = report.stages[-1].diagnostics
    assert abs(final.total_energy_residual) <= 1e-6
    assert abs(final.entropy_balance_residual) <= 1e-6
    assert final.mass_defect_l2 <= 1e-3
