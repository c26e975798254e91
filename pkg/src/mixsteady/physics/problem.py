"""Problem configuration loading and data-field construction."""
from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from mixsteady.errors import ConfigError, ConfigParseError, ConfigValidationError
from mixsteady.physics.grid import Grid
from mixsteady.physics.models import (
    ConstantForce,
    ConstantTheta,
    CsvForce,
    CsvTheta,
    FourierForce,
    FourierTheta,
    GaussianForce,
    GaussianTheta,
    PotentialForce,
    ProblemConfig,
)

logger = logging.getLogger(__name__)

_BOUND_WORDS = {
    "greater_than": (">", "gt"),
    "greater_than_equal": (">=", "ge"),
    "less_than": ("<", "lt"),
    "less_than_equal": ("<=", "le"),
}


def _violation(err: Dict[str, Any]) -> Tuple[str, str]:
    """Turn one pydantic error into a (field, constraint) pair."""
    field = ".".join(str(part) for part in err["loc"]) or "<root>"
    kind = err["type"]
    ctx = err.get("ctx") or {}
    if kind in _BOUND_WORDS:
        op, key = _BOUND_WORDS[kind]
        return field, f"{op} {ctx[key]:g} required"
    if kind == "missing":
        return field, "required"
    if kind == "extra_forbidden":
        return field, "unknown key"
    msg = str(err.get("msg", kind))
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, ") :]
    return field, msg


def parse_config(text: str, source: str = "<string>") -> ProblemConfig:
    """Parse and validate YAML text; every violation is reported, not only the first."""
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark else 0
        column = mark.column + 1 if mark else 0
        raise ConfigParseError(f"{source}: {e.problem or e}", line, column) from None
    except yaml.YAMLError as e:
        raise ConfigParseError(f"{source}: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigParseError(f"{source}: top level must be a mapping of blocks", 1, 1)
    try:
        return ProblemConfig.model_validate(raw)
    except ValidationError as e:
        violations: List[Tuple[str, str]] = [_violation(err) for err in e.errors()]
        raise ConfigValidationError(violations) from None


def load_config(path: Union[str, Path]) -> ProblemConfig:
    """Load a YAML problem config from disk."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config not found: {p}")
    try:
        text = p.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        raise ConfigParseError(f"{p}: not valid UTF-8 ({e.reason})") from None
    config = parse_config(text, source=str(p))
    logger.debug("Loaded config %s", p)
    return config


def config_digest(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- data presets --


def build_force(config: ProblemConfig, grid: Grid, base_dir: Path) -> np.ndarray:
    """Body force per unit mass, shape (2, nx+1, ny+1)."""
    data = config.data.force
    X, Y = grid.X, grid.Y
    if isinstance(data, ConstantForce):
        f = np.stack([np.full(grid.shape, data.value[0]), np.full(grid.shape, data.value[1])])
    elif isinstance(data, FourierForce):
        ax = data.kx * np.pi / grid.Lx
        ay = data.ky * np.pi / grid.Ly
        f = data.amplitude * np.stack(
            [np.sin(ax * X) * np.cos(ay * Y), -np.cos(ax * X) * np.sin(ay * Y)]
        )
    elif isinstance(data, GaussianForce):
        bump = data.amplitude * np.exp(
            -((X - data.center[0]) ** 2 + (Y - data.center[1]) ** 2) / (2.0 * data.width**2)
        )
        f = np.stack([bump * data.direction[0], bump * data.direction[1]])
    elif isinstance(data, PotentialForce):
        a = data.k * np.pi / grid.Lx
        f = np.stack([-data.amplitude * a * np.sin(a * X), np.zeros(grid.shape)])
    elif isinstance(data, CsvForce):
        from mixsteady.storage.fields import read_field

        f = read_field(_resolve(data.path, base_dir), grid, ("f_x", "f_y"))
    else:  # pragma: no cover - union is closed
        raise ConfigError(f"unsupported force preset: {data}")
    return np.asarray(f, dtype=float)


def force_potential(config: ProblemConfig, grid: Grid) -> Optional[np.ndarray]:
    """phi with f = grad phi for the gradient-force preset, else None."""
    data = config.data.force
    if isinstance(data, PotentialForce):
        return data.amplitude * np.cos(data.k * np.pi / grid.Lx * grid.X)
    return None


def build_theta_boundary(config: ProblemConfig, grid: Grid, base_dir: Path) -> np.ndarray:
    """Boundary temperature on the node grid; interior values are unused (set to 1)."""
    data = config.data.theta_boundary
    X, Y = grid.X, grid.Y
    if isinstance(data, ConstantTheta):
        theta = np.full(grid.shape, data.value)
    elif isinstance(data, FourierTheta):
        theta = data.base + data.amplitude * np.cos(data.k * np.pi * X / grid.Lx) * np.cos(
            data.k * np.pi * Y / grid.Ly
        )
    elif isinstance(data, GaussianTheta):
        theta = data.base + data.amplitude * np.exp(
            -((X - data.center[0]) ** 2 + (Y - data.center[1]) ** 2) / (2.0 * data.width**2)
        )
    elif isinstance(data, CsvTheta):
        from mixsteady.storage.fields import read_boundary_field

        theta = read_boundary_field(_resolve(data.path, base_dir), grid, "theta")
    else:  # pragma: no cover
        raise ConfigError(f"unsupported boundary preset: {data}")
    theta = np.where(grid.boundary_mask, theta, 1.0)
    if not np.all(theta > 0.0):
        raise ConfigError("boundary temperature must be > 0")
    return theta


def _resolve(path: str, base_dir: Path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else base_dir / p


class Problem:
    """A loaded configuration with its grid and data fields materialized."""

    def __init__(self, config: ProblemConfig, base_dir: Union[str, Path] = ".", digest: str = "") -> None:
        self.config = config
        self.base_dir = Path(base_dir)
        self.digest = digest
        self.grid = Grid(config.grid)
        self.spec = config.mixture
        self.params = config.continuation
        self.solver = config.solver
        self.force = build_force(config, self.grid, self.base_dir)
        self.theta_b = build_theta_boundary(config, self.grid, self.base_dir)

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> Problem:
        p = Path(path)
        return cls(load_config(p), base_dir=p.parent, digest=config_digest(p))

    def with_config(self, config: ProblemConfig) -> Problem:
        return Problem(config, base_dir=self.base_dir, digest=self.digest)

    @property
    def theta_mean(self) -> float:
        """Boundary-averaged Theta, the start value for the temperature."""
        return float(self.grid.integrate_boundary(self.theta_b) / (2.0 * (self.grid.Lx + self.grid.Ly)))


def update_config(config: ProblemConfig, **blocks: Dict[str, Any]) -> ProblemConfig:
    """``config.with_updates`` with violations reported like a loaded file."""
    try:
        return config.with_updates(**blocks)
    except ValidationError as e:
        raise ConfigValidationError([_violation(err) for err in e.errors()]) from None
