"""Tests for the command line (typer CliRunner, real solves on the trivial problem)."""
from __future__ import annotations

import pytest
from typer.testing import CliRunner

from mixsteady.main import app
from tests.conftest import trivial_raw

runner = CliRunner()


@pytest.fixture
def trivial_config(write_config):
    return write_config(trivial_raw())


def _solve(config, out):
    return runner.invoke(app, ["solve", "--config", str(config), "--out", str(out)])


def test_list():
    result = runner.invoke(app, ["list"])
    assert result.exit_code == 0
    assert "sweep" in result.output


def test_unknown_log_level_exits_2():
    result = runner.invoke(app, ["--log-level", "LOUD", "list"])
    assert result.exit_code == 2
    assert "unknown log level" in result.output


def test_status(trivial_config):
    result = runner.invoke(app, ["status", "--config", str(trivial_config)])
    assert result.exit_code == 0
    assert "mixsteady Configuration" in result.output


def test_invalid_config_exits_2(write_config, tmp_path):
    path = write_config(trivial_raw(mixture={"gamma": 0.5}))
    result = _solve(path, tmp_path / "out")
    assert result.exit_code == 2
    assert "mixture.gamma" in result.output
    assert not (tmp_path / "out").exists()


def test_mean_density_below_minimum_exits_before_solving(write_config, tmp_path, mocker):
    spy = mocker.patch("mixsteady.core.homotopy.solve_at")
    path = write_config(trivial_raw(continuation={"M": 5.0}))
    result = _solve(path, tmp_path / "out")
    assert result.exit_code == 2
    assert "PreconditionError" in result.output
    spy.assert_not_called()


def test_solve_then_check_reproduces(trivial_config, tmp_path):
    out = tmp_path / "out"
    result = _solve(trivial_config, out)
    assert result.exit_code == 0, result.output
    for name in ("report.json", "diagnostics.json", "state/state.json", "state/theta.csv", "state/Y_2.csv"):
        assert (out / name).is_file(), name

    checked = runner.invoke(app, ["check", "--state", str(out / "state"), "--config", str(trivial_config)])
    assert checked.exit_code == 0, checked.output
    assert "Reproduces the embedded diagnostics exactly" in checked.output
    assert (out / "check.json").is_file()


def test_repeated_solve_is_byte_identical(trivial_config, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert _solve(trivial_config, first).exit_code == 0
    assert _solve(trivial_config, second).exit_code == 0
    for name in ("report.json", "diagnostics.json", "state/r.csv", "state/u.csv", "state/theta.csv", "state/Y_1.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_check_rejects_nonpositive_temperature(trivial_config, tmp_path):
    out = tmp_path / "out"
    assert _solve(trivial_config, out).exit_code == 0
    theta = out / "state" / "theta.csv"
    lines = theta.read_text().splitlines()
    row = lines[10].split(",")
    row[-1] = "-1.0"
    lines[10] = ",".join(row)
    theta.write_text("\n".join(lines) + "\n")

    result = runner.invoke(app, ["check", "--state", str(out / "state"), "--config", str(trivial_config)])
    assert result.exit_code == 5
    assert "DomainError" in result.output


def test_check_missing_state_exits_6(trivial_config, tmp_path):
    result = runner.invoke(app, ["check", "--state", str(tmp_path / "nowhere"), "--config", str(trivial_config)])
    assert result.exit_code == 6


def test_sweep_M_ledger_marks_refused_row(trivial_config, tmp_path):
    out = tmp_path / "sweep"
    result = runner.invoke(
        app, ["sweep", "--config", str(trivial_config), "--axis", "M", "--values", "5,100", "--out", str(out)]
    )
    assert result.exit_code == 0, result.output
    ledger = (out / "ledger.csv").read_text()
    assert "failed: PreconditionError" in ledger
    assert "# independence apriori1" in ledger
    assert (out / "rows" / "000.json").is_file()
    assert (out / "rows" / "001.json").is_file()


def test_sweep_bad_values_exit_2(trivial_config, tmp_path):
    result = runner.invoke(
        app, ["sweep", "--config", str(trivial_config), "--axis", "delta", "--values", "0.1,abc", "--out", str(tmp_path)]
    )
    assert result.exit_code == 2


def test_mms_unknown_case_exits_2(trivial_config, tmp_path):
    result = runner.invoke(
        app, ["mms", "--config", str(trivial_config), "--case", "acoustic", "--levels", "8,16", "--out", str(tmp_path)]
    )
    assert result.exit_code == 2


def test_mms_writes_table(trivial_config, tmp_path):
    result = runner.invoke(
        app, ["mms", "--config", str(trivial_config), "--case", "thermal", "--levels", "8,16", "--out", str(tmp_path)]
    )
    assert result.exit_code == 0, result.output
    assert (tmp_path / "mms_thermal.csv").is_file()
    assert (tmp_path / "mms_thermal.json").is_file()
