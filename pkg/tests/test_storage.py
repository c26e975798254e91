"""Tests for field CSVs, the state manifest and the report writers."""
from __future__ import annotations

import json

import numpy as np
import pytest

from mixsteady.core.diagnostics import diagnose
from mixsteady.core.homotopy import composite_norm
from mixsteady.core.reports import MmsLevel, MmsReport, SweepFit, SweepResult, SweepRow
from mixsteady.errors import DomainError, SchemaError
from mixsteady.physics.grid import Grid
from mixsteady.physics.models import GridSpec
from mixsteady.physics.state import FieldState
from mixsteady.storage.fields import (
    MANIFEST,
    load_state,
    read_boundary_field,
    read_field,
    read_manifest,
    write_field,
    write_state,
)
from mixsteady.storage.reports import (
    DiagnosticsDocument,
    diagnostics_match,
    read_json,
    write_json,
    write_ledger,
    write_mms_table,
)


@pytest.fixture
def state(trivial_problem, rng):
    grid = trivial_problem.grid
    theta = 1.0 + 0.1 * rng.uniform(size=grid.shape)
    Y1 = 0.3 + 0.1 * rng.uniform(size=grid.shape)
    return FieldState.from_primitives(
        100.0,
        rng.normal(scale=0.1, size=grid.shape),
        rng.normal(scale=0.1, size=(2,) + grid.shape),
        theta,
        np.stack([Y1, 1.0 - Y1]),
    )


def test_state_round_trip_is_exact(tmp_path, trivial_problem, state):
    grid = trivial_problem.grid
    manifest = write_state(state, grid, tmp_path / "state", 0.01, digest="abc")
    assert manifest.files == {"r": "r.csv", "u": "u.csv", "theta": "theta.csv", "Y_1": "Y_1.csv", "Y_2": "Y_2.csv"}
    assert (tmp_path / "state" / MANIFEST).is_file()

    back, read = load_state(tmp_path / "state", grid)
    assert read.config_sha256 == "abc"
    assert read.delta == 0.01
    for a, b in zip(state.arrays(), back.arrays()):
        np.testing.assert_array_equal(a, b)
    assert composite_norm(state, back, grid, 2.0, 4.0) == 0.0


def test_diagnostics_survive_round_trip(tmp_path, trivial_problem, state):
    write_state(state, trivial_problem.grid, tmp_path / "state", 0.1)
    back, _ = load_state(tmp_path / "state")
    a = diagnose(state, trivial_problem, 0.1)
    b = diagnose(back, trivial_problem, 0.1)
    assert a.model_dump_json() == b.model_dump_json()
    assert diagnostics_match(a, b) is None


def test_diagnostics_match_names_first_difference(trivial_problem, state):
    a = diagnose(state, trivial_problem, 0.1)
    b = a.model_copy(update={"xi": a.xi + 1.0})
    assert diagnostics_match(a, b) == "xi"


def test_field_header_carries_provenance(tmp_path, grid):
    path = write_field(tmp_path / "f.csv", grid, ["a"], np.zeros((1,) + grid.shape), digest="deadbeef")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# mixsteady ")
    assert lines[1] == "# config_sha256 deadbeef"
    assert lines[2] == "i,j,x,y,a"


def test_grid_mismatch(tmp_path, trivial_problem, state):
    write_state(state, trivial_problem.grid, tmp_path / "state", 0.1)
    with pytest.raises(SchemaError, match="does not match"):
        load_state(tmp_path / "state", Grid(GridSpec(nx=16, ny=16)))


def test_missing_manifest(tmp_path):
    with pytest.raises(SchemaError, match="manifest not found") as exc:
        read_manifest(tmp_path)
    assert exc.value.exit_code == 6


def test_manifest_with_wrong_format(tmp_path, trivial_problem, state):
    write_state(state, trivial_problem.grid, tmp_path, 0.1)
    doc = json.loads((tmp_path / MANIFEST).read_text())
    doc["format"] = "other"
    (tmp_path / MANIFEST).write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="unsupported format"):
        read_manifest(tmp_path)


def _rewrite(path, edit):
    lines = path.read_text().splitlines()
    path.write_text("\n".join(edit(lines)) + "\n")


@pytest.mark.parametrize(
    "edit,message",
    [
        (lambda ls: ls[:2] + ["i,j,x,y,temperature"] + ls[3:], "do not match"),
        (lambda ls: ls[:3] + [ls[3] + ",1.0"] + ls[4:], "columns"),
        (lambda ls: ls[:3] + [ls[3].rsplit(",", 1)[0] + ",abc"] + ls[4:], "non-numeric"),
        (lambda ls: ls[:-1], "missing"),
        (lambda ls: ls + [ls[3]], "duplicate"),
        (lambda ls: ls + ["99,0,0.0,0.0,1.0"], "outside the grid"),
    ],
)
def test_malformed_field(tmp_path, grid, edit, message):
    path = write_field(tmp_path / "theta.csv", grid, ["theta"], np.ones((1,) + grid.shape))
    _rewrite(path, edit)
    with pytest.raises(SchemaError, match=message):
        read_field(path, grid, ["theta"])


def test_nonpositive_temperature_reports_node(tmp_path, trivial_problem, state):
    grid = trivial_problem.grid
    write_state(state, grid, tmp_path, 0.1)
    theta = state.theta.copy()
    theta[2, 5] = -1.0
    write_field(tmp_path / "theta.csv", grid, ["theta"], theta[None])
    with pytest.raises(DomainError) as exc:
        load_state(tmp_path, grid)
    assert exc.value.node == (2, 5)
    assert exc.value.exit_code == 5


def test_boundary_field(tmp_path, grid):
    values = 1.0 + grid.X + grid.Y
    path = write_field(tmp_path / "theta_b.csv", grid, ["theta"], values[None], boundary_only=True)
    back = read_boundary_field(path, grid, "theta")
    np.testing.assert_array_equal(back[grid.boundary_mask], values[grid.boundary_mask])
    assert np.all(back[~grid.boundary_mask] == 1.0)


def test_json_round_trip_and_schema_error(tmp_path, trivial_problem, state):
    doc = DiagnosticsDocument(M=100.0, delta=0.1, diagnostics=diagnose(state, trivial_problem, 0.1))
    path = write_json(doc, tmp_path / "diagnostics.json")
    assert read_json(path, DiagnosticsDocument).diagnostics.xi == doc.diagnostics.xi
    (tmp_path / "bad.json").write_text('{"M": "many"}')
    with pytest.raises(SchemaError):
        read_json(tmp_path / "bad.json", DiagnosticsDocument)


def test_ledger_lines(tmp_path):
    result = SweepResult(
        axis="delta",
        rows=[
            SweepRow(axis="delta", value=0.1, M=100.0, delta=0.1, mass_defect_l2=1e-3, ledger={"apriori1": 2.0}),
            SweepRow(axis="delta", value=0.01, status="failed: NonConvergence"),
        ],
        fits=[SweepFit(quantity="mass_defect_l2", against="delta", slope=2.0, points=2)],
        g_val_one=True,
    )
    text = write_ledger(result, tmp_path / "ledger.csv", digest="abc").read_text().splitlines()
    assert text[1] == "# config_sha256 abc"
    assert text[2].split(",")[:3] == ["axis", "value", "status"]
    assert text[2].endswith("ledger_apriori1")
    assert text[3].startswith("delta,0.1,ok,100.0,0.1,,0.001,")
    assert text[4].startswith("delta,0.01,failed: NonConvergence,")
    assert "# fit mass_defect_l2 vs delta: slope=2.0 points=2" in text
    assert "# g_val == 1 at every final state: True" in text


def test_mms_table(tmp_path):
    report = MmsReport(
        case="thermal",
        convection="upwind",
        levels=[MmsLevel(nx=16, ny=16, h=0.0625, error=4e-3), MmsLevel(nx=32, ny=32, h=0.03125, error=1e-3, order=2.0)],
        observed_order=2.0,
    )
    lines = write_mms_table(report, tmp_path / "mms.csv").read_text().splitlines()
    assert lines[2] == "# case thermal convection upwind"
    assert lines[3] == "nx,ny,h,error,order"
    assert lines[4] == "16,16,0.0625,0.004,"
    assert lines[-1] == "# observed_order 2.0"
