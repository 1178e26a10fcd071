import json
import tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.core.config import config
from app.core.errors import usage_error
from app.enums.relationship_enums import InitStrategy, RelationshipKind


class PgdConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    iterations: int = Field(
        200, ge=1, description="Projected gradient steps per slice (T_pgd)"
    )
    power_iterations: int = Field(
        100, ge=1, description="Power-iteration steps used to estimate sigma_max"
    )
    projection_tolerance: float = Field(
        1e-9,
        gt=0,
        description="Per-coordinate bisection tolerance; the stopping rule uses tol * N",
    )
    step_size_override: Optional[float] = Field(
        None, gt=0, description="Fixed step size instead of 0.5 * (m / sigma_max)^2"
    )
    init: InitStrategy = Field(
        InitStrategy.WARM, description="Start from the current slice or a uniform point"
    )


class BaselineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps: float = Field(..., description="Per-table epsilon")
    delta: float = Field(1e-6, gt=0, lt=1, description="Per-table delta")
    n_out: Optional[int] = Field(
        None, ge=1, description="Rows to generate; defaults to the input row count"
    )
    order: int = Field(1, ge=1, le=2, description="Marginal order used (1 or 2)")


class SynthesisConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps_rel: float = Field(..., gt=0, description="Epsilon spent on the relationships")
    delta_rel: float = Field(1e-6, gt=0, lt=1, description="Delta spent on the relationships")
    T: int = Field(10, ge=0, description="Outer iterations")
    K: int = Field(3, ge=0, description="Workloads selected per iteration")
    alpha: float = Field(
        0.2, description="Share of each round's budget given to workload selection"
    )
    k: int = Field(3, ge=2, description="Order of the cross-table marginals")
    m_syn: int = Field(..., ge=0, description="Edge count of the synthetic relationship")
    slice_rows: Optional[int] = Field(
        None, ge=1, description="Rows per slice; defaults to every synthetic table1 row"
    )
    slice_cols: Optional[int] = Field(
        None, ge=1, description="Columns per slice; defaults to every synthetic table2 row"
    )
    n_slices: int = Field(1, ge=1, description="Slices optimised per iteration")
    min_related_fraction: float = Field(
        0.2,
        ge=0,
        le=1,
        description="Minimum share of slice rows and columns that currently have an edge",
    )
    top_error_workloads: int = Field(
        8, description="Accumulated workloads with the largest error kept for optimisation"
    )
    workload_subsample: Optional[int] = Field(
        None, ge=1, description="Candidates scored per iteration; None scores all"
    )
    pgd: PgdConfig = Field(default_factory=PgdConfig)
    baseline: Optional[BaselineConfig] = Field(
        None, description="Single-table generator used when no synthetic tables are given"
    )
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED, ge=0)
    kind: RelationshipKind = Field(RelationshipKind.MANY_TO_MANY)

    @model_validator(mode="after")
    def validate_ranges(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.top_error_workloads < 1:
            raise ValueError("top_error_workloads must be >= 1")
        return self


def parse_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        usage_error("CONFIG_NOT_READABLE", f"Cannot read config file {path}: {exc}")
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        usage_error("CONFIG_PARSE_ERROR", f"Cannot parse config file {path}: {exc}")


def build_config(data: Dict[str, Any], seed: Optional[int] = None) -> SynthesisConfig:
    data = dict(data)
    if seed is not None:
        data["seed"] = seed
    try:
        return SynthesisConfig.model_validate(data)
    except ValidationError as exc:
        usage_error(
            "INVALID_CONFIG",
            "Config does not match SynthesisConfig",
            {
                "errors": exc.errors(
                    include_url=False, include_context=False, include_input=False
                )
            },
        )


def load_config(path: Union[str, Path], seed: Optional[int] = None) -> SynthesisConfig:
    return build_config(parse_config_file(path), seed)
