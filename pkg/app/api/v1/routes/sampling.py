from fastapi import APIRouter

from app.core.rng import RngStreams
from app.enums.relationship_enums import SamplerMethod
from app.schemas.api import SampleRequest, SampleResponse
from app.services.ubs import rejection_sample, ubs

router = APIRouter(prefix="/sample", tags=["Debug"])


@router.post("", response_model=SampleResponse)
def sample(payload: SampleRequest) -> SampleResponse:
    """Draw exactly m indices with the requested sampler."""
    rng = RngStreams(payload.seed)["sampling"]
    if payload.method == SamplerMethod.REJECTION:
        picks = rejection_sample(payload.vector, payload.m, rng)
    else:
        picks = ubs(payload.vector, payload.m, rng)
    return SampleResponse(indices=picks.tolist())
