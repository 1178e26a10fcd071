"""
API v1 Router

Aggregates all v1 API routes under the /api/v1 prefix.
"""

from fastapi import APIRouter

from app.api.v1.routes import budget, evaluation, projection, sampling

# Create the v1 router with prefix
router = APIRouter(prefix="/api/v1")

router.include_router(budget.router)
router.include_router(evaluation.router)

# Debug entry points into the numerical kernels
router.include_router(projection.router)
router.include_router(sampling.router)
