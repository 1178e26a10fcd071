import uvicorn

from app.core.config import config
from app.core.logs.logging_utils import get_logger
from app.factory import app

logger = get_logger("app")

__all__ = ["app", "serve"]


def serve() -> None:
    """Run the debug API with the host, port and log level from settings."""
    logger.info(
        "Serving relsynth API",
        extra={"host": config.HOST, "port": config.PORT, "environment": config.ENVIRONMENT},
    )
    uvicorn.run(
        "app.main:app",
        host=config.HOST,
        port=config.PORT,
        reload=config.RELOAD,
        log_level=config.LOG_LEVEL.lower(),
    )


if __name__ == "__main__":
    serve()
