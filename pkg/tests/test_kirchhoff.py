"""Tests for the Kirchhoff transform and its inverse."""
from __future__ import annotations

import numpy as np
import pytest

from mixsteady.core.kirchhoff import (
    kirchhoff,
    kirchhoff_derivative,
    kirchhoff_inverse,
    kirchhoff_inverse_field,
)
from mixsteady.errors import PreconditionError


@pytest.mark.parametrize("D0M,eps", [(1.0, 1e-3), (1.0, 0.1), (0.5, 1e-2)])
def test_round_trip(D0M, eps):
    x = np.linspace(-30.0, 30.0, 1000)
    back = kirchhoff_inverse(kirchhoff(x, D0M, eps), D0M, eps)
    assert np.max(np.abs(back - x)) <= 1e-10


def test_inverse_residual_at_roundoff():
    W = np.concatenate([-np.logspace(-8, 3, 40), [0.0], np.logspace(-8, 12, 40)])
    w = kirchhoff_inverse(W, 100.0, 1e-9)
    assert np.all(np.abs(kirchhoff(w, 100.0, 1e-9) - W) <= 1e-12 * (1.0 + np.abs(W)))


def test_asymptotic_regime_is_linear():
    D0M, eps = 1.0, 1e-3
    y = np.linspace(-30.0, -20.0, 50)
    assert np.all(np.abs(kirchhoff_derivative(y, D0M, eps) / eps - 1.0) < 0.01)
    # H(y) + D0M ~ eps y: the exponential part is negligible
    assert np.all(np.abs((kirchhoff(y, D0M, eps) + D0M) / (eps * y) - 1.0) < 0.01)


def test_anchored_at_zero():
    assert kirchhoff(0.0, 3.0, 0.1) == 0.0
    assert kirchhoff_inverse(0.0, 3.0, 0.1) == 0.0


def test_scalar_and_field_shapes():
    w = kirchhoff_inverse(2.0, 1.0, 0.1)
    assert np.ndim(w) == 0
    W = np.arange(12.0).reshape(3, 4) - 6.0
    assert kirchhoff_inverse_field(W, 1.0, 0.1).shape == (3, 4)


def test_monotone():
    x = np.linspace(-10.0, 10.0, 200)
    assert np.all(np.diff(kirchhoff(x, 2.0, 1e-4)) > 0.0)


@pytest.mark.parametrize("D0M,eps", [(1.0, 0.0), (0.0, 1e-3), (1.0, -1.0)])
def test_requires_positive_constants(D0M, eps):
    with pytest.raises(PreconditionError):
        kirchhoff(1.0, D0M, eps)
    with pytest.raises(PreconditionError):
        kirchhoff_inverse(1.0, D0M, eps)
