"""Tests for the viscous operator and its dissipation density."""
from __future__ import annotations

import numpy as np
import pytest

from mixsteady.physics.mixture import double_dot, viscous_stress
from mixsteady.physics.viscous import viscous_blocks, viscous_dissipation


def _apply(grid, rho, u):
    Axx, Axy, Ayx, Ayy = viscous_blocks(grid, rho)
    ux, uy = u[0].ravel(), u[1].ravel()
    return np.stack([(Axx @ ux + Axy @ uy).reshape(grid.shape), (Ayx @ ux + Ayy @ uy).reshape(grid.shape)])


def test_work_equals_integrated_dissipation(grid, rng):
    rho = 50.0 + 10.0 * rng.uniform(size=grid.shape)
    u = rng.normal(size=(2,) + grid.shape)
    u[0][grid.on_x_wall] = 0.0
    u[1][grid.on_y_wall] = 0.0
    work = grid.integrate(np.sum(u * _apply(grid, rho, u), axis=0))
    assert work == pytest.approx(grid.integrate(viscous_dissipation(grid, rho, u)), rel=1e-12)


def test_dissipation_is_nonnegative(grid, rng):
    rho = 1.0 + rng.uniform(size=grid.shape)
    u = rng.normal(size=(2,) + grid.shape)
    assert np.all(viscous_dissipation(grid, rho, u) >= 0.0)


def test_operator_is_symmetric_in_the_volume_product(grid, rng):
    rho = 1.0 + rng.uniform(size=grid.shape)
    u = rng.normal(size=(2,) + grid.shape)
    v = rng.normal(size=(2,) + grid.shape)
    uv = grid.integrate(np.sum(u * _apply(grid, rho, v), axis=0))
    vu = grid.integrate(np.sum(v * _apply(grid, rho, u), axis=0))
    assert uv == pytest.approx(vu, rel=1e-10)


@pytest.mark.parametrize("motion", ["translation", "rotation"])
def test_rigid_motions_do_not_dissipate(grid, motion):
    if motion == "translation":
        u = np.stack([np.full(grid.shape, 0.3), np.full(grid.shape, -1.2)])
    else:
        u = np.stack([-grid.Y, grid.X])
    rho = np.full(grid.shape, 100.0)
    np.testing.assert_allclose(viscous_dissipation(grid, rho, u), 0.0, atol=1e-10)
    np.testing.assert_allclose(_apply(grid, rho, u), 0.0, atol=1e-8)


def test_dissipation_approximates_stress_power_inside(grid):
    rho = np.full(grid.shape, 2.0)
    u = np.stack([grid.X**2 * grid.Y, grid.X * grid.Y**2])
    grad = np.array([[2.0 * grid.X * grid.Y, grid.X**2], [grid.Y**2, 2.0 * grid.X * grid.Y]])
    exact = double_dot(viscous_stress(rho, grad), grad)
    err = np.abs(viscous_dissipation(grid, rho, u) - exact)[1:-1, 1:-1]
    assert np.max(err) <= 0.05 * np.max(exact)
