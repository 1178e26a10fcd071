from typing import Optional
from pydantic import BaseModel, ConfigDict, Field


class BudgetReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    rho_total: float = Field(..., ge=0, description="zCDP budget of the run")
    eps0: float = Field(..., ge=0, description="Per-round privacy parameter")
    per_iteration_spend: float = Field(
        ..., ge=0, description="zCDP spent by one iteration (K selections + K releases)"
    )
    eps_equivalent_at_delta: float = Field(
        ..., ge=0, description="(eps, delta)-DP equivalent of rho_total"
    )
    delta: float = Field(..., gt=0, lt=1, description="delta used for the conversion")
    rho_spent: float = Field(0.0, ge=0, description="zCDP charged so far")
    rho_remaining: float = Field(0.0, description="rho_total - rho_spent")
    K: int = Field(..., ge=0, description="Workloads selected per iteration")
    T: int = Field(..., ge=0, description="Iterations")
    alpha: float = Field(..., ge=0, le=1, description="Exponential-mechanism share")
    gaussian_sigma: Optional[float] = Field(
        None, description="Noise std per marginal cell, when m and d_max are known"
    )


class CompositionReport(BaseModel):
    eps_total: float = Field(..., ge=0)
    delta_total: float = Field(..., ge=0)
