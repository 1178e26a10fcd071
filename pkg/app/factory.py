from contextlib import asynccontextmanager
from typing import Dict

from fastapi import FastAPI

from app.api.exception_handlers import register_exception_handlers
from app.api.v1.router import router as v1_router
from app.core.config import config
from app.core.logs.logging import setup_logging
from app.core.logs.logging_utils import RequestIdMiddleware, get_logger
from app.core.sentry import init_sentry

setup_logging()

logger = get_logger("app")


@asynccontextmanager
async def lifespan(app: FastAPI):
    logger.info("Starting relsynth API", extra={"environment": config.ENVIRONMENT})
    yield
    logger.info("Shutting down relsynth API")


def create_app() -> FastAPI:
    """Application factory function."""
    init_sentry()
    application = FastAPI(
        lifespan=lifespan,
        title="relsynth API",
        description="Privacy accounting, projection, sampling and evaluation endpoints",
        version="0.1.0",
        docs_url="/docs",
        redoc_url="/redoc",
    )
    application.add_middleware(RequestIdMiddleware)
    register_exception_handlers(application)
    _register_routes(application)
    return application


def _register_routes(app: FastAPI) -> None:
    app.include_router(v1_router)

    @app.get("/", tags=["Sanity Check"])
    def read_root() -> Dict[str, str]:
        return {"msg": "Application is running"}

    @app.get("/health", tags=["Health Check"])
    def health_check() -> Dict[str, str]:
        return {"status": "ok"}


app = create_app()
