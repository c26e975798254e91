"""Pydantic models for the problem configuration."""
from __future__ import annotations

from typing import Annotated, ClassVar, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Block(BaseModel):
    """Config block: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class MixtureSpec(_Block):
    """Mixture constants; every constitutive closure reads from here.

    All molar masses are 1, so ``c_p = c_v + 1`` exactly.
    """

    alpha: ClassVar[int] = 3

    n: int = Field(default=2, ge=2, description="Species count")
    gamma: float = Field(default=2.0, gt=1.0, description="Adiabatic exponent")
    c_v: List[float] = Field(default_factory=lambda: [1.5, 1.5], description="Specific heats at constant volume")
    D0: float = Field(default=1.0, gt=0.0, description="Diffusion baseline constant")
    kappa0: float = Field(default=1.0, gt=0.0, description="Heat conductivity baseline constant")
    L0: float = Field(default=1.0, gt=0.0, description="Boundary heat transfer baseline constant")
    Lambda: float = Field(default=1.0, ge=0.0, description="Production-rate strength")
    B_omega: float = Field(default=100.0, gt=0.0, description="Production clamp bound")
    f_fric: float = Field(default=0.0, ge=0.0, description="Navier slip friction coefficient")

    @field_validator("c_v")
    @classmethod
    def _c_v_positive(cls, v: List[float]) -> List[float]:
        if any(not (c > 0.0) for c in v):
            raise ValueError("all entries > 0 required")
        return v

    @model_validator(mode="after")
    def _c_v_length(self) -> MixtureSpec:
        if len(self.c_v) != self.n:
            raise ValueError(f"c_v must have n={self.n} entries, got {len(self.c_v)}")
        return self

    @property
    def cv(self) -> np.ndarray:
        return np.asarray(self.c_v, dtype=float)

    @property
    def cp(self) -> np.ndarray:
        return self.cv + 1.0


class GridSpec(_Block):
    """Axis-aligned rectangle [0, Lx] x [0, Ly] with nx x ny cells."""

    Lx: float = Field(default=1.0, gt=0.0)
    Ly: float = Field(default=1.0, gt=0.0)
    nx: int = Field(default=32, ge=8, description="Cells in x")
    ny: int = Field(default=32, ge=8, description="Cells in y")

    @property
    def hx(self) -> float:
        return self.Lx / self.nx

    @property
    def hy(self) -> float:
        return self.Ly / self.ny


def _default_deltas() -> List[float]:
    return [float(d) for d in np.logspace(-1.0, -3.0, 5)]


class ContinuationParams(_Block):
    """Homotopy schedule and fixed-point controls.

    epsilon is never set independently: it is always delta**3.
    """

    M: float = Field(default=100.0, gt=0.0, description="Mean density")
    M_min: float = Field(default=10.0, gt=0.0, description="Smallest admissible M")
    lambda_steps: int = Field(default=11, ge=2, description="Uniform lambda steps on [0, 1]")
    lambda_schedule: Optional[List[float]] = Field(default=None, description="Explicit lambda grid")
    delta_schedule: List[float] = Field(default_factory=_default_deltas)
    C0: float = Field(default=10.0, gt=0.0, description="Cap constant of g(.)")
    E: float = Field(default=10.0, gt=0.0, description="Membership radius (low-order norms)")
    C_f: float = Field(default=10.0, gt=0.0, description="Membership radius (high-order norms)")
    damping: float = Field(default=0.5, gt=0.0, le=1.0)
    fp_tol: float = Field(default=1e-8, gt=0.0)
    max_fp: int = Field(default=200, ge=1)
    p: float = Field(default=4.0, gt=3.0, description="Integrability exponent of the strong norms")

    @field_validator("delta_schedule")
    @classmethod
    def _deltas_decreasing(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one delta required")
        if any(not (d > 0.0) for d in v):
            raise ValueError("all deltas > 0 required")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule must be strictly decreasing")
        return v

    @field_validator("lambda_schedule")
    @classmethod
    def _lambdas(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is None:
            return v
        if len(v) < 2 or v[0] != 0.0 or v[-1] != 1.0:
            raise ValueError("schedule must start at 0 and end at 1")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule must be strictly increasing")
        return v

    @property
    def lambdas(self) -> List[float]:
        if self.lambda_schedule is not None:
            return list(self.lambda_schedule)
        return [float(x) for x in np.linspace(0.0, 1.0, self.lambda_steps)]

    @staticmethod
    def epsilon(delta: float) -> float:
        return delta**3


class SubsolverConfig(_Block):
    """Tolerances and switches shared by the three subsolvers."""

    newton_tol: float = Field(default=1e-10, gt=0.0, description="Relative residual tolerance")
    max_newton: int = Field(default=50, ge=1)
    step_tol: float = Field(default=1e-13, gt=0.0, description="Relative step floor")
    backtrack: float = Field(default=0.5, gt=0.0, lt=1.0, description="Line-search factor")
    max_backtrack: int = Field(default=30, ge=1)
    picard_tol: float = Field(default=1e-10, gt=0.0)
    picard_stall_tol: float = Field(
        default=1e-6, gt=0.0, description="Relative Picard change accepted once the updates stop shrinking"
    )
    max_picard: int = Field(default=100, ge=1)
    convection: Literal["upwind", "centered"] = "upwind"
    pressure_stabilization: float = Field(default=0.25, ge=0.0)
    exp_guard: float = Field(default=700.0, gt=0.0)


# -- data presets --


class ConstantForce(_Block):
    preset: Literal["constant"] = "constant"
    value: Tuple[float, float] = (0.0, 0.0)


class FourierForce(_Block):
    """f = A (sin(kx pi x/Lx) cos(ky pi y/Ly), -cos(kx pi x/Lx) sin(ky pi y/Ly))."""

    preset: Literal["fourier"] = "fourier"
    amplitude: float = 0.1
    kx: int = Field(default=1, ge=0)
    ky: int = Field(default=1, ge=0)


class GaussianForce(_Block):
    preset: Literal["gaussian"] = "gaussian"
    amplitude: float = 0.1
    center: Tuple[float, float] = (0.5, 0.5)
    width: float = Field(default=0.2, gt=0.0)
    direction: Tuple[float, float] = (1.0, 0.0)


class PotentialForce(_Block):
    """Gradient force f = grad(A cos(k pi x / Lx))."""

    preset: Literal["potential"] = "potential"
    amplitude: float = 0.1
    k: int = Field(default=1, ge=1)


class CsvForce(_Block):
    preset: Literal["csv"] = "csv"
    path: str


ForceData = Annotated[
    Union[ConstantForce, FourierForce, GaussianForce, PotentialForce, CsvForce],
    Field(discriminator="preset"),
]


class ConstantTheta(_Block):
    preset: Literal["constant"] = "constant"
    value: float = Field(default=1.0, gt=0.0)


class FourierTheta(_Block):
    """Theta = base + amplitude cos(k pi x/Lx) cos(k pi y/Ly)."""

    preset: Literal["fourier"] = "fourier"
    base: float = Field(default=1.0, gt=0.0)
    amplitude: float = 0.1
    k: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _positive(self) -> FourierTheta:
        if abs(self.amplitude) >= self.base:
            raise ValueError("|amplitude| < base required for a positive boundary temperature")
        return self


class GaussianTheta(_Block):
    preset: Literal["gaussian"] = "gaussian"
    base: float = Field(default=1.0, gt=0.0)
    amplitude: float = Field(default=0.1, ge=0.0)
    center: Tuple[float, float] = (0.5, 0.5)
    width: float = Field(default=0.2, gt=0.0)


class CsvTheta(_Block):
    preset: Literal["csv"] = "csv"
    path: str


ThetaData = Annotated[
    Union[ConstantTheta, FourierTheta, GaussianTheta, CsvTheta],
    Field(discriminator="preset"),
]


class DataBlock(_Block):
    force: ForceData = Field(default_factory=ConstantForce)
    theta_boundary: ThetaData = Field(default_factory=ConstantTheta)


class ProblemConfig(_Block):
    """The full problem: four required blocks plus optional solver tuning."""

    grid: GridSpec
    mixture: MixtureSpec
    continuation: ContinuationParams
    data: DataBlock
    solver: SubsolverConfig = Field(default_factory=SubsolverConfig)

    def with_updates(self, **blocks: dict) -> ProblemConfig:
        """Copy with selected block fields replaced, re-validated."""
        raw = self.model_dump()
        for name, values in blocks.items():
            raw[name].update(values)
        return ProblemConfig.model_validate(raw)

