"""Field CSV files and the state manifest.

One CSV per field, columns ``i,j,x,y,<name>...``, preceded by ``#`` header
lines carrying the tool version and the config sha256. Floats are written
with ``repr`` (shortest round-trip form), so reading a file back yields the
written values exactly.
"""
from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from mixsteady import __version__
from mixsteady.errors import SchemaError
from mixsteady.physics.grid import Grid
from mixsteady.physics.models import GridSpec
from mixsteady.physics.state import FieldState

logger = logging.getLogger(__name__)

MANIFEST = "state.json"
STATE_FORMAT = "mixsteady-state"
SCHEMA_VERSION = 1
COORD_COLUMNS = ("i", "j", "x", "y")

PathLike = Union[str, Path]


class StateManifest(BaseModel):
    format: str = STATE_FORMAT
    schema_version: int = SCHEMA_VERSION
    version: str = __version__
    config_sha256: str = ""
    M: float
    delta: float
    n: int
    grid: GridSpec
    files: Dict[str, str]


def provenance_lines(digest: str) -> List[str]:
    return [f"# mixsteady {__version__}", f"# config_sha256 {digest}"]


def _fmt(value: float) -> str:
    return repr(float(value))


def write_field(
    path: PathLike,
    grid: Grid,
    names: Sequence[str],
    values: np.ndarray,
    digest: str = "",
    boundary_only: bool = False,
) -> Path:
    """Write ``values`` of shape ``(len(names), nx+1, ny+1)`` to one CSV."""
    p = Path(path)
    values = np.asarray(values, dtype=float).reshape((len(names),) + grid.shape)
    with p.open("w", newline="", encoding="utf-8") as fh:
        for line in provenance_lines(digest):
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*COORD_COLUMNS, *names])
        for i in range(grid.shape[0]):
            for j in range(grid.shape[1]):
                if boundary_only and not grid.boundary_mask[i, j]:
                    continue
                writer.writerow(
                    [i, j, _fmt(grid.x[i]), _fmt(grid.y[j]), *(_fmt(values[k, i, j]) for k in range(len(names)))]
                )
    return p


def _rows(path: Path) -> Tuple[List[str], Iterator[Tuple[int, List[str]]]]:
    if not path.is_file():
        raise SchemaError(f"field file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    numbered = [(n + 1, line) for n, line in enumerate(lines) if line.strip() and not line.startswith("#")]
    if not numbered:
        raise SchemaError(f"{path}: no column header")
    header = next(csv.reader([numbered[0][1]]))
    body = ((n, next(csv.reader([line]))) for n, line in numbered[1:])
    return header, body


def _read(path: PathLike, grid: Grid, names: Sequence[str], boundary_only: bool) -> np.ndarray:
    p = Path(path)
    header, body = _rows(p)
    expected = [*COORD_COLUMNS, *names]
    if header != expected:
        raise SchemaError(f"{p}: columns {header} do not match {expected}")

    out = np.full((len(names),) + grid.shape, np.nan)
    seen = np.zeros(grid.shape, dtype=bool)
    tol = 1e-9 * max(grid.Lx, grid.Ly)
    for line_no, row in body:
        if len(row) != len(expected):
            raise SchemaError(f"{p}:{line_no}: expected {len(expected)} columns, got {len(row)}")
        try:
            i, j = int(row[0]), int(row[1])
            x, y = float(row[2]), float(row[3])
            vals = [float(v) for v in row[4:]]
        except ValueError:
            raise SchemaError(f"{p}:{line_no}: non-numeric entry") from None
        if not (0 <= i < grid.shape[0] and 0 <= j < grid.shape[1]):
            raise SchemaError(f"{p}:{line_no}: node ({i}, {j}) outside the grid {grid}")
        if seen[i, j]:
            raise SchemaError(f"{p}:{line_no}: duplicate node ({i}, {j})")
        if abs(x - grid.x[i]) > tol or abs(y - grid.y[j]) > tol:
            raise SchemaError(f"{p}:{line_no}: coordinates of node ({i}, {j}) do not match the grid")
        seen[i, j] = True
        out[:, i, j] = vals

    required = grid.boundary_mask if boundary_only else np.ones(grid.shape, dtype=bool)
    missing = np.argwhere(required & ~seen)
    if missing.size:
        raise SchemaError(f"{p}: {len(missing)} node(s) missing, first {tuple(int(k) for k in missing[0])}")
    return out


def read_field(path: PathLike, grid: Grid, names: Sequence[str]) -> np.ndarray:
    """Read a per-node CSV; returns shape ``(len(names), nx+1, ny+1)``."""
    return _read(path, grid, names, boundary_only=False)


def read_boundary_field(path: PathLike, grid: Grid, name: str) -> np.ndarray:
    """Read a boundary CSV (every boundary node required); interior set to 1."""
    values = _read(path, grid, (name,), boundary_only=True)[0]
    return np.where(grid.boundary_mask, values, 1.0)


def _species_names(n: int) -> List[str]:
    return [f"Y_{k + 1}" for k in range(n)]


def write_state(
    state: FieldState, grid: Grid, out_dir: PathLike, delta: float, digest: str = ""
) -> StateManifest:
    """Write r, u, theta and every Y_k plus the ``state.json`` manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: Dict[str, str] = {}
    write_field(out / "r.csv", grid, ["r"], state.r[None], digest)
    files["r"] = "r.csv"
    write_field(out / "u.csv", grid, ["u_x", "u_y"], state.u, digest)
    files["u"] = "u.csv"
    write_field(out / "theta.csv", grid, ["theta"], state.theta[None], digest)
    files["theta"] = "theta.csv"
    for k, name in enumerate(_species_names(state.n)):
        write_field(out / f"{name}.csv", grid, [name], state.Y[k][None], digest)
        files[name] = f"{name}.csv"

    manifest = StateManifest(
        config_sha256=digest, M=state.M, delta=delta, n=state.n, grid=grid.spec, files=files,
    )
    (out / MANIFEST).write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote state (%d fields) to %s", len(files), out)
    return manifest


def read_manifest(state_dir: PathLike) -> StateManifest:
    p = Path(state_dir) / MANIFEST
    if not p.is_file():
        raise SchemaError(f"state manifest not found: {p}")
    try:
        manifest = StateManifest.model_validate_json(p.read_text(encoding="utf-8"))
    except ValidationError as e:
        raise SchemaError(f"{p}: {e.error_count()} schema violation(s): {e.errors()[0]['loc']}") from None
    if manifest.format != STATE_FORMAT or manifest.schema_version != SCHEMA_VERSION:
        raise SchemaError(f"{p}: unsupported format {manifest.format} v{manifest.schema_version}")
    return manifest


def load_state(state_dir: PathLike, grid: Optional[Grid] = None) -> Tuple[FieldState, StateManifest]:
    """Read a state written by ``write_state``.

    Raises ``SchemaError`` for malformed files and ``DomainError`` (with the
    offending node) for nonpositive temperature, density or mass fraction.
    """
    root = Path(state_dir)
    manifest = read_manifest(root)
    if grid is None:
        grid = Grid(manifest.grid)
    elif grid.spec != manifest.grid:
        raise SchemaError(f"state grid {manifest.grid} does not match configured grid {grid.spec}")

    names = _species_names(manifest.n)
    for key in ("r", "u", "theta", *names):
        if key not in manifest.files:
            raise SchemaError(f"{root / MANIFEST}: no file listed for '{key}'")

    r = read_field(root / manifest.files["r"], grid, ["r"])[0]
    u = read_field(root / manifest.files["u"], grid, ["u_x", "u_y"])
    theta = read_field(root / manifest.files["theta"], grid, ["theta"])[0]
    Y = np.stack([read_field(root / manifest.files[name], grid, [name])[0] for name in names])
    state = FieldState.from_primitives(manifest.M, r, u, theta, Y)
    logger.debug("Loaded %r from %s", state, root)
    return state, manifest
