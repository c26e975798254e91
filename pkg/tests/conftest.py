"""Shared test fixtures."""
from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest
import yaml

from mixsteady.physics.grid import Grid
from mixsteady.physics.models import GridSpec, MixtureSpec, ProblemConfig
from mixsteady.physics.problem import Problem

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"

TRIVIAL: Dict[str, Any] = {
    "grid": {"nx": 12, "ny": 12},
    "mixture": {"n": 2, "gamma": 2.0, "c_v": [1.5, 1.5], "Lambda": 0.0},
    "continuation": {"M": 100.0, "M_min": 10.0, "lambda_steps": 3, "delta_schedule": [0.1, 0.01]},
    "data": {
        "force": {"preset": "constant", "value": [0.0, 0.0]},
        "theta_boundary": {"preset": "constant", "value": 1.0},
    },
}


@pytest.fixture(autouse=True)
def _env_defaults(monkeypatch):
    """Set default env vars for tests."""
    defaults = {
        "MIXSTEADY_CONFIG": str(CONFIG_DIR / "smoke.yml"),
        "OUTPUT_DIR": "out",
        "JOBS": "1",
        "LOG_LEVEL": "WARNING",
        "ENVIRONMENT": "test",
    }
    for k, v in defaults.items():
        monkeypatch.setenv(k, v)

    # Reset singleton
    import mixsteady.config as cfg

    cfg._settings = None
    yield
    cfg._settings = None


def trivial_raw(**blocks: Dict[str, Any]) -> Dict[str, Any]:
    """The trivial-data problem as a raw dict, with selected block fields replaced."""
    raw = copy.deepcopy(TRIVIAL)
    for name, values in blocks.items():
        raw.setdefault(name, {}).update(values)
    return raw


@pytest.fixture
def write_config(tmp_path):
    """Write a problem YAML into tmp_path and return its path."""

    def _write(raw: Dict[str, Any], name: str = "problem.yml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(raw, sort_keys=False), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def trivial_problem() -> Problem:
    return Problem(ProblemConfig.model_validate(trivial_raw()), digest="test")


@pytest.fixture
def grid() -> Grid:
    return Grid(GridSpec(nx=16, ny=12, Lx=1.0, Ly=0.75))


@pytest.fixture
def spec() -> MixtureSpec:
    return MixtureSpec(n=3, gamma=2.0, c_v=[1.5, 2.5, 3.0], Lambda=1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def smoke_problem() -> Problem:
    """The shipped smoke problem (live reactions) on a coarse grid with a short schedule."""
    shipped = Problem.from_path(CONFIG_DIR / "smoke.yml")
    config = shipped.config.with_updates(
        grid={"nx": 16, "ny": 16},
        continuation={"lambda_steps": 3, "delta_schedule": [0.1, 0.01]},
    )
    return shipped.with_config(config)
