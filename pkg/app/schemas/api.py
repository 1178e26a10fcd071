from pathlib import Path
from typing import Annotated, List, Optional

from pydantic import AfterValidator, BaseModel, Field

from app.core.config import config
from app.enums.relationship_enums import SamplerMethod


def _check_length(values: List[float]) -> List[float]:
    if len(values) > config.MAX_UPLOAD_VECTOR:
        raise ValueError(f"vector longer than {config.MAX_UPLOAD_VECTOR} entries")
    return values


Vector = Annotated[List[float], AfterValidator(_check_length)]


class ProjectRequest(BaseModel):
    vector: Vector = Field(..., description="Point to project")
    m: float = Field(..., ge=0, description="Required sum of the projection")
    tol: Optional[float] = Field(None, gt=0, description="Bisection tolerance on the sum")


class ProjectResponse(BaseModel):
    vector: List[float]
    total: float


class SampleRequest(BaseModel):
    vector: Vector = Field(..., description="Inclusion probabilities in [0, 1]")
    m: int = Field(..., ge=0, description="Number of indices to draw")
    seed: int = Field(default_factory=lambda: config.DEFAULT_SEED, ge=0)
    method: SamplerMethod = Field(SamplerMethod.UBS)


class SampleResponse(BaseModel):
    indices: List[int]


class EvaluateRequest(BaseModel):
    real_dir: Path = Field(..., description="Real bundle directory, relative to DATA_ROOT or inside it")
    syn_dir: Path = Field(..., description="Synthetic bundle directory, relative to DATA_ROOT or inside it")
    k: int = Field(3, ge=2, description="Marginal order")
