from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.enums.privacy_enums import SweepParameter
from app.enums.relationship_enums import RelationshipKind
from app.schemas.budget import BudgetReport, CompositionReport


class WorkloadError(BaseModel):
    workload: str = Field(..., description="Human-readable feature subsets")
    side1: List[int] = Field(..., description="Table1 feature indices")
    side2: List[int] = Field(..., description="Table2 feature indices")
    l1: float = Field(..., ge=0, description="L1 distance between the marginals")
    tv: float = Field(..., ge=0, description="Total variation distance")


class EvaluationReport(BaseModel):
    k: int = Field(..., ge=2)
    n_workloads: int = Field(..., ge=0)
    average_error: float = Field(..., ge=0, description="Mean L1 error over workloads")
    average_tv: float = Field(..., ge=0)
    mse: float = Field(..., ge=0, description="Squared query error divided by the workload count")
    per_workload: List[WorkloadError] = Field(default_factory=list)

    def to_text(self, limit: Optional[int] = 20) -> str:
        lines = [
            f"{self.k}-way cross-table marginals over {self.n_workloads} workloads",
            f"  average L1 error : {self.average_error:.6f}",
            f"  average TV       : {self.average_tv:.6f}",
            f"  workload mse     : {self.mse:.6e}",
        ]
        worst = sorted(self.per_workload, key=lambda w: w.l1, reverse=True)
        if limit is not None:
            worst = worst[:limit]
        if worst:
            lines.append("  largest errors:")
            width = max(len(w.workload) for w in worst)
            lines.extend(f"    {w.workload:<{width}}  {w.l1:.6f}" for w in worst)
        return "\n".join(lines)


class SliceRecord(BaseModel):
    rows: int = Field(..., ge=0)
    cols: int = Field(..., ge=0)
    m_slice: int = Field(..., ge=0)
    objective: Optional[float] = Field(None, description="Final PGD objective; None when skipped")
    step_size: Optional[float] = None
    skipped: bool = False


class IterationRecord(BaseModel):
    iteration: int = Field(..., ge=0)
    selected: List[str] = Field(default_factory=list, description="Workloads chosen this round")
    noisy_errors: Dict[str, float] = Field(
        default_factory=dict,
        description="L1 distance between each noisy marginal and the synthetic one",
    )
    optimised: List[str] = Field(
        default_factory=list, description="Workloads kept for PGD after top-error pruning"
    )
    slices: List[SliceRecord] = Field(default_factory=list)
    rho_spent: float = Field(..., ge=0)
    workload_mse: Optional[float] = Field(
        None, description="mse against the accumulated noisy answers after the round"
    )


class RunManifest(BaseModel):
    run_id: str
    seed: int
    kind: RelationshipKind
    config: Dict[str, Any] = Field(..., description="Echo of the SynthesisConfig")
    m: int = Field(..., ge=0, description="Edge count of the real relationship")
    d_max: int = Field(..., ge=0)
    m_syn: int = Field(..., ge=0)
    n1_syn: int = Field(..., ge=0)
    n2_syn: int = Field(..., ge=0)
    budget: Optional[BudgetReport] = None
    composition: Optional[CompositionReport] = None
    iterations: List[IterationRecord] = Field(default_factory=list)


class SweepPoint(BaseModel):
    value: float
    errors: List[float] = Field(..., description="Average k-way error per seed")
    mean_error: float


class SweepResult(BaseModel):
    parameter: SweepParameter
    seeds: List[int]
    points: List[SweepPoint] = Field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"{self.parameter:>10}  mean error  (over {len(self.seeds)} seeds)"]
        lines.extend(f"{p.value:>10g}  {p.mean_error:.6f}" for p in self.points)
        return "\n".join(lines)
