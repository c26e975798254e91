"""Tests for settings and problem configuration loading."""
from __future__ import annotations

import pytest
from pydantic import ValidationError

from mixsteady.config import Settings, get_settings
from mixsteady.errors import ConfigError, ConfigParseError, ConfigValidationError
from mixsteady.physics.models import ContinuationParams
from mixsteady.physics.problem import Problem, config_digest, load_config, parse_config, update_config
from tests.conftest import CONFIG_DIR, trivial_raw


def test_settings_defaults():
    """Test that settings load with defaults."""
    settings = get_settings()
    assert settings.JOBS == 1
    assert settings.OUTPUT_DIR == "out"
    assert settings.ENVIRONMENT == "test"
    assert settings.MIXSTEADY_CONFIG.endswith("smoke.yml")


def test_settings_singleton():
    """Test that get_settings returns the same instance."""
    s1 = get_settings()
    s2 = get_settings()
    assert s1 is s2


def test_settings_reject_zero_jobs(monkeypatch):
    monkeypatch.setenv("JOBS", "0")
    with pytest.raises(ValidationError):
        Settings()


def test_smoke_config_loads():
    config = load_config(CONFIG_DIR / "smoke.yml")
    assert config.grid.nx == config.grid.ny == 64
    assert config.mixture.Lambda > 0.0
    assert config.solver.convection == "centered"
    assert config.mixture.c_v == [1.5, 2.5]
    assert config.continuation.M == 100.0
    assert config.continuation.M_min == 10.0
    assert config.data.force.preset == "fourier"


def test_trivial_config_loads():
    config = load_config(CONFIG_DIR / "trivial.yml")
    assert config.data.force.preset == "constant"
    assert config.mixture.c_v[0] == config.mixture.c_v[1]


def test_gamma_below_one_is_reported(write_config):
    path = write_config(trivial_raw(mixture={"gamma": 0.5}))
    with pytest.raises(ConfigValidationError) as exc:
        load_config(path)
    assert ("mixture.gamma", "> 1 required") in exc.value.violations
    assert exc.value.exit_code == 2


def test_increasing_delta_schedule_rejected(write_config):
    path = write_config(trivial_raw(continuation={"delta_schedule": [0.01, 0.1]}))
    with pytest.raises(ConfigValidationError) as exc:
        load_config(path)
    assert exc.value.fields() == ["continuation.delta_schedule"]


def test_all_violations_collected(write_config):
    raw = trivial_raw(mixture={"gamma": 0.5, "D0": -1.0}, grid={"nx": 2})
    with pytest.raises(ConfigValidationError) as exc:
        load_config(write_config(raw))
    fields = exc.value.fields()
    assert "mixture.gamma" in fields
    assert "mixture.D0" in fields
    assert "grid.nx" in fields


def test_unknown_key_rejected(write_config):
    raw = trivial_raw(mixture={"viscosity": 1.0})
    with pytest.raises(ConfigValidationError) as exc:
        load_config(write_config(raw))
    assert ("mixture.viscosity", "unknown key") in exc.value.violations


def test_c_v_length_must_match_species_count(write_config):
    raw = trivial_raw(mixture={"n": 3})
    with pytest.raises(ConfigValidationError):
        load_config(write_config(raw))


def test_parse_error_carries_position():
    with pytest.raises(ConfigParseError) as exc:
        parse_config("grid:\n  nx: [1, 2\n")
    assert exc.value.line >= 2
    assert exc.value.column >= 1


def test_top_level_must_be_mapping():
    with pytest.raises(ConfigParseError):
        parse_config("- just\n- a list\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yml")


def test_epsilon_is_delta_cubed():
    assert ContinuationParams.epsilon(0.1) == 0.1**3
    params = ContinuationParams(lambda_steps=5)
    assert params.lambdas == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_update_config_revalidates(trivial_problem):
    updated = update_config(trivial_problem.config, continuation={"M": 1000.0})
    assert updated.continuation.M == 1000.0
    assert updated.continuation.delta_schedule == trivial_problem.config.continuation.delta_schedule
    with pytest.raises(ConfigValidationError):
        update_config(trivial_problem.config, continuation={"M": -1.0})


def test_problem_from_path_materializes_data(write_config):
    path = write_config(trivial_raw())
    problem = Problem.from_path(path)
    assert problem.digest == config_digest(path)
    assert problem.force.shape == (2, 13, 13)
    assert problem.theta_mean == pytest.approx(1.0)
