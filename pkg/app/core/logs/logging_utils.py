"""Logging helpers that tag records with the current run or request id."""

import logging
import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Callable, Iterator, Optional

from fastapi import Request, Response
from starlette.middleware.base import BaseHTTPMiddleware

# Shared by CLI runs (run id) and HTTP requests (request id)
run_id_ctx: ContextVar[str] = ContextVar("run_id", default="")


@contextmanager
def run_context(run_id: Optional[str] = None) -> Iterator[str]:
    """Bind a run id to every log record emitted inside the block."""
    rid = run_id or uuid.uuid4().hex[:12]
    token = run_id_ctx.set(rid)
    try:
        yield rid
    finally:
        run_id_ctx.reset(token)


class RequestIdMiddleware(BaseHTTPMiddleware):
    """Middleware to add request_id to all logs within a request context."""

    async def dispatch(self, request: Request, call_next: Callable) -> Response:
        request_id = request.headers.get("X-Request-ID", str(uuid.uuid4()))
        token = run_id_ctx.set(request_id)
        request.state.request_id = request_id
        try:
            response = await call_next(request)
        finally:
            run_id_ctx.reset(token)
        response.headers["X-Request-ID"] = request_id
        return response


class RunIdFilter(logging.Filter):
    """Logging filter that adds run_id to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id_ctx.get("")
        return True


def get_logger(name: str = "app") -> logging.Logger:
    """Get a logger with run_id filter attached."""
    logger = logging.getLogger(name)

    if not any(isinstance(f, RunIdFilter) for f in logger.filters):
        logger.addFilter(RunIdFilter())

    return logger
