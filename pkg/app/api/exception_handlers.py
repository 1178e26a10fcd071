from typing import Any, Callable, Dict, List, Sequence, cast

from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException

from app.core.errors import ErrorResponse, SynthesisError
from app.core.logs.logging_utils import get_logger

logger = get_logger("app.exception_handlers")

STATUS_CODES = {
    400: "BAD_REQUEST",
    404: "NOT_FOUND",
    405: "METHOD_NOT_ALLOWED",
    409: "CONFLICT",
    422: "VALIDATION_ERROR",
    500: "INTERNAL_SERVER_ERROR",
}


async def handle_unhandled_exception(request: Request, exc: Exception) -> JSONResponse:
    logger.exception(
        "Unhandled exception",
        extra={"path": request.url.path, "method": request.method},
    )
    payload = ErrorResponse(code="INTERNAL_SERVER_ERROR", message="Internal server error")
    return JSONResponse(status_code=500, content=payload.model_dump())


async def synthesis_error_handler(request: Request, exc: Exception) -> JSONResponse:
    """Render coded domain errors with the status their class declares."""
    error = cast(SynthesisError, exc)
    logger.warning(
        "Request rejected",
        extra={
            "path": request.url.path,
            "code": error.code,
            "status_code": error.status_code,
        },
    )
    return JSONResponse(
        status_code=error.status_code,
        content=jsonable_encoder(error.to_response()),
    )


def _plain_errors(errors: Sequence[Any]) -> List[Dict[str, Any]]:
    # validator ctx carries the raised exception object
    return [
        {**err, "ctx": {k: str(v) for k, v in err["ctx"].items()}} if "ctx" in err else dict(err)
        for err in errors
    ]


async def validation_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    errors = _plain_errors(cast(RequestValidationError, exc).errors())
    logger.warning(
        "Request validation failed",
        extra={"path": request.url.path, "errors": errors},
    )
    payload = ErrorResponse(
        code="VALIDATION_ERROR",
        message="Request validation failed",
        details={"errors": errors},
    ).model_dump()
    return JSONResponse(status_code=422, content=jsonable_encoder(payload))


async def http_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    http_exc = cast(HTTPException, exc)
    code = STATUS_CODES.get(http_exc.status_code, f"HTTP_{http_exc.status_code}")
    payload = ErrorResponse(code=code, message=str(http_exc.detail))
    return JSONResponse(status_code=http_exc.status_code, content=payload.model_dump())


def register_exception_handlers(app: FastAPI) -> None:
    app.add_exception_handler(Exception, handle_unhandled_exception)
    app.add_exception_handler(SynthesisError, cast(Callable, synthesis_error_handler))
    app.add_exception_handler(
        RequestValidationError, cast(Callable, validation_exception_handler)
    )
    app.add_exception_handler(HTTPException, cast(Callable, http_exception_handler))
