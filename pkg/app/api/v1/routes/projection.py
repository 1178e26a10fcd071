from fastapi import APIRouter

from app.schemas.api import ProjectRequest, ProjectResponse
from app.services.projection import project_capped_simplex

router = APIRouter(prefix="/project", tags=["Debug"])


@router.post("", response_model=ProjectResponse)
def project(payload: ProjectRequest) -> ProjectResponse:
    """Euclidean projection onto {0 <= x <= 1, sum(x) = m}."""
    x = project_capped_simplex(payload.vector, payload.m, payload.tol)
    return ProjectResponse(vector=x.tolist(), total=float(x.sum()))
