"""Tests for the constitutive closures."""
from __future__ import annotations

import numpy as np
import pytest

from mixsteady.errors import DomainError, PreconditionError
from mixsteady.physics.mixture import (
    ThermoPoint,
    affinities,
    blended_coefficients,
    cap_function,
    entropy_gibbs,
    fluxes,
    internal_energy,
    pressure,
    production_rates,
    transport_coefficients,
    viscous_stress,
)


def _random_point(rng, spec, size=10_000):
    rho = rng.uniform(10.0, 1000.0, size)
    theta = rng.uniform(0.1, 10.0, size)
    Y = rng.uniform(0.01, 1.0, (spec.n, size))
    Y /= Y.sum(axis=0)
    return ThermoPoint(rho, theta, Y).validate()


def test_gibbs_identity(rng, spec):
    pt = _random_point(rng, spec)
    s_k, s, h_k, g_k, g = entropy_gibbs(pt, spec)
    np.testing.assert_allclose(g_k, h_k - pt.theta * s_k, rtol=1e-13, atol=1e-10)
    np.testing.assert_allclose(s, np.sum(pt.Y * s_k, axis=0), rtol=1e-13, atol=1e-10)
    np.testing.assert_allclose(g, np.sum(pt.Y * g_k, axis=0), rtol=1e-13, atol=1e-10)


def test_cp_is_cv_plus_one(spec):
    np.testing.assert_array_equal(spec.cp, spec.cv + 1.0)


def test_production_rates_sum_to_zero_exactly(rng, spec):
    pt = _random_point(rng, spec)
    omega = production_rates(pt.theta, pt.Y, spec)
    total = omega[0].copy()
    for k in range(1, spec.n):
        total = total + omega[k]
    assert np.all(total == 0.0)


def test_production_dissipates(rng, spec):
    pt = _random_point(rng, spec)
    omega = production_rates(pt.theta, pt.Y, spec)
    _, _, _, g_k, _ = entropy_gibbs(pt, spec)
    work = np.sum(omega * g_k, axis=0)
    scale = np.sum(np.abs(omega * g_k), axis=0)
    assert np.all(work <= 1e-12 * np.maximum(1.0, scale))


def test_rates_do_not_depend_on_density(rng, spec):
    """The affinities equal (g_k - mean g)/theta at any density."""
    pt = _random_point(rng, spec, size=100)
    v = affinities(pt.theta, pt.Y, spec)
    for factor in (0.5, 3.0):
        moved = ThermoPoint(pt.rho * factor, pt.theta, pt.Y)
        _, _, _, g_k, _ = entropy_gibbs(moved, spec)
        g_rel = (g_k - np.mean(g_k, axis=0)) / pt.theta
        np.testing.assert_allclose(g_rel, v, rtol=1e-9, atol=1e-9)


def test_production_clamped(spec):
    theta = np.array([1.0])
    Y = np.array([[1e-30], [0.5], [0.5]])
    strong = spec.model_copy(update={"B_omega": 1.0})
    omega = production_rates(theta, Y, strong)
    v = affinities(theta, Y, strong)
    assert np.max(np.abs(v)) > 1.0
    assert np.max(np.abs(omega[:-1])) <= strong.Lambda * strong.B_omega * (1 + 1e-12)


def test_pressure_and_energy_uniform(spec):
    pt = ThermoPoint(2.0, 3.0, np.full(spec.n, 1.0 / spec.n))
    assert pressure(pt, spec) == pytest.approx(2.0**2 + 6.0)
    expected = 2.0 + 3.0 * np.mean(spec.cv)
    assert internal_energy(pt, spec) == pytest.approx(expected)


def test_transport_scales_with_density(spec):
    pt = ThermoPoint(np.array([1.0, 2.0]), np.array([1.0, 1.0]), np.full((spec.n, 2), 1.0 / spec.n))
    kappa, D, L = transport_coefficients(pt, spec)
    assert kappa[1] == pytest.approx(2.0 * kappa[0])
    assert D[1] == pytest.approx(2.0 * D[0])
    assert L[0] == pytest.approx(spec.L0 * 2.0)


def test_blended_coefficients_endpoints(rng, spec):
    pt = _random_point(rng, spec, size=50)
    M = 100.0
    at_one = blended_coefficients(pt, M, 1.0, spec)
    for got, want in zip(at_one, transport_coefficients(pt, spec)):
        np.testing.assert_allclose(got, want)
    kappa0, D0, _ = blended_coefficients(pt, M, 0.0, spec)
    np.testing.assert_allclose(D0, spec.D0 * M)
    np.testing.assert_allclose(kappa0, spec.kappa0 * M * (1.0 + pt.theta**3))
    with pytest.raises(PreconditionError):
        blended_coefficients(pt, M, 1.5, spec)


def test_nonpositive_temperature_reports_node(spec):
    pt = ThermoPoint(np.ones(4), np.array([1.0, 1.0, -0.5, 1.0]), np.full((spec.n, 4), 1.0 / spec.n))
    with pytest.raises(DomainError) as exc:
        entropy_gibbs(pt, spec)
    assert exc.value.node == (2,)
    assert exc.value.exit_code == 5


def test_regularized_flux_sum(spec):
    """With sum Y = 1 the Fick fluxes cancel; J_k adds eps/Y_k + delta weights."""
    shape = (4, 4)
    Y = np.stack([np.full(shape, 0.2), np.full(shape, 0.3), np.full(shape, 0.5)])
    grad_Y = np.zeros((3, 2) + shape)
    grad_Y[0, 0] = 1.0
    grad_Y[1, 0] = -1.0
    pt = ThermoPoint(np.full(shape, 10.0), np.ones(shape), Y)
    grads = {"theta": np.zeros((2,) + shape), "Y": grad_Y}
    F, q, Q, J = fluxes(pt, grads, spec, D_lambda=10.0, epsilon=1e-3, delta=0.1)
    np.testing.assert_allclose(np.sum(F, axis=0), 0.0, atol=1e-14)
    np.testing.assert_allclose(q, 0.0)
    expected = -(10.0 + (1e-3 + 0.1 * 0.2) / 0.2) + (10.0 + (1e-3 + 0.1 * 0.3) / 0.3)
    np.testing.assert_allclose(np.sum(J, axis=0)[0], expected)


def test_viscous_stress_symmetric(rng):
    grad_u = rng.normal(size=(2, 2, 5, 5))
    S = viscous_stress(3.0, grad_u)
    np.testing.assert_allclose(S, np.swapaxes(S, 0, 1))


def test_cap_function():
    assert cap_function(5.0, 10.0) == 1.0
    assert cap_function(30.0, 10.0) == 3.0
