"""Pydantic report models emitted by solves, diagnostics, sweeps and MMS runs."""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class SubsolveReport(BaseModel):
    """Outcome of one Newton or Picard solve."""

    name: str = Field(description="Subsolver and unknown (e.g. 'species[1]')")
    iterations: int = 0
    initial_residual: float = 0.0
    final_residual: float = 0.0
    converged: bool = False
    history: List[float] = Field(default_factory=list)


class SetCheck(BaseModel):
    quantity: str
    value: float
    bound: float
    holds: bool


class SetVerdict(BaseModel):
    """Membership of a state component in one solution set."""

    name: str = Field(description="M_u, M_r, M_theta or M_Y")
    holds: bool
    checks: List[SetCheck] = Field(default_factory=list)


class MembershipReport(BaseModel):
    sets: List[SetVerdict] = Field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(s.holds for s in self.sets)

    def verdict(self, name: str) -> SetVerdict:
        for s in self.sets:
            if s.name == name:
                return s
        raise KeyError(name)


class LedgerEntry(BaseModel):
    """One a-priori bound quantity measured on a state.

    ``holds`` stays None for quantities that can only be judged across a sweep.
    """

    key: str
    description: str = ""
    lhs: float
    rhs: Optional[float] = None
    ratio: Optional[float] = None
    holds: Optional[bool] = None


class DiagnosticsReport(BaseModel):
    """Balance residuals, entropy production and bound ledger of one state."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    M: float
    delta: float
    epsilon: float
    sigma_min: float
    sigma_max: float
    sigma_integral: float
    sigma_terms: Dict[str, float] = Field(default_factory=dict, description="Integrals of the four sigma terms")
    regularization_integral: float = Field(description="Integral of the delta/epsilon dissipation, reported separately")
    entropy_balance_residual: float
    total_energy_residual: float
    xi: float
    xi_over_M: float
    mass_defect_l2: float
    mass_defect_w12: float
    flux_sum_regularized: float = Field(description="||sum_k J_k||_2")
    flux_sum_physical: float = Field(description="||sum_k F_k||_2")
    compat: List[float] = Field(default_factory=list, description="Integral of omega_k per species")
    ledger: List[LedgerEntry] = Field(default_factory=list)
    independence_note: str = (
        "bound independence is judged empirically: a ledger quantity 'holds' when it "
        "varies by at most 25% across an M-sweep"
    )
    sigma_field: Optional[Any] = Field(default=None, exclude=True)

    def ledger_value(self, key: str) -> float:
        for e in self.ledger:
            if e.key == key:
                return e.lhs
        raise KeyError(key)


class StageRecord(BaseModel):
    """One accepted (lambda, delta) stage of the construction."""

    lam: float
    delta: float
    epsilon: float
    iterations: int
    update_norm: float
    update_history: List[float] = Field(default_factory=list)
    g_val: float
    subsolves: List[SubsolveReport] = Field(default_factory=list)
    membership: Optional[MembershipReport] = None
    diagnostics: Optional[DiagnosticsReport] = None


class DefectPoint(BaseModel):
    delta: float
    l2: float
    w12: float


class ConstructionReport(BaseModel):
    """Full record of a run; partial when ``completed`` is False."""

    version: str
    config_sha256: str = ""
    M: float
    stages: List[StageRecord] = Field(default_factory=list)
    defect_trace: List[DefectPoint] = Field(default_factory=list)
    completed: bool = False
    failure: Optional[str] = None
    final_g_val: Optional[float] = None

    def final_stages(self) -> List[StageRecord]:
        """The lambda = 1 stage of every delta."""
        return [s for s in self.stages if s.lam == 1.0]


class MmsLevel(BaseModel):
    nx: int
    ny: int
    h: float
    error: float
    order: Optional[float] = None


class MmsReport(BaseModel):
    case: str
    convection: str
    levels: List[MmsLevel] = Field(default_factory=list)
    observed_order: Optional[float] = None
    dual_path_difference: Optional[float] = Field(
        default=None, description="Species case: max |w_kirchhoff - w_newton| on the finest level"
    )


class SweepRow(BaseModel):
    axis: str
    value: float
    status: str = "ok"
    M: float = 0.0
    delta: float = 0.0
    g_val: Optional[float] = None
    mass_defect_l2: Optional[float] = None
    mass_defect_w12: Optional[float] = None
    xi: Optional[float] = None
    xi_over_M: Optional[float] = None
    entropy_balance_residual: Optional[float] = None
    total_energy_residual: Optional[float] = None
    sigma_min: Optional[float] = None
    max_abs_compat: Optional[float] = None
    ledger: Dict[str, float] = Field(default_factory=dict)


class SweepFit(BaseModel):
    """Log-log slope of ``quantity`` against the sweep axis."""

    quantity: str
    against: str
    slope: Optional[float] = None
    points: int = 0


class SweepResult(BaseModel):
    axis: str
    rows: List[SweepRow] = Field(default_factory=list)
    fits: List[SweepFit] = Field(default_factory=list)
    independence: Dict[str, Optional[bool]] = Field(default_factory=dict)
    xi_over_M_decreasing: Optional[bool] = None
    g_val_one: Optional[bool] = None
