from typing import Any, Dict, NoReturn, Optional
from pydantic import BaseModel


class ErrorResponse(BaseModel):
    code: str
    message: str
    details: Optional[Dict[str, Any]] = None


class SynthesisError(Exception):
    """Base error carrying a stable code, a human message and optional details.

    ``exit_code`` is what the CLI returns, ``status_code`` what the HTTP
    surface answers with.
    """

    exit_code: int = 1
    status_code: int = 400

    def __init__(
        self,
        code: str,
        message: str,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details

    def to_response(self) -> ErrorResponse:
        return ErrorResponse(code=self.code, message=self.message, details=self.details)

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class UsageError(SynthesisError):
    exit_code = 1
    status_code = 400


class DataError(SynthesisError):
    exit_code = 2
    status_code = 422


class BudgetError(SynthesisError):
    exit_code = 3
    status_code = 409


def usage_error(
    code: str, message: str, details: Optional[Dict[str, Any]] = None
) -> NoReturn:
    raise UsageError(code, message, details)


def data_error(
    code: str, message: str, details: Optional[Dict[str, Any]] = None
) -> NoReturn:
    """Raise a DataError with a consistent shape.

    Use from services for malformed inputs, shape mismatches and
    infeasible numerical targets.
    """
    raise DataError(code, message, details)


def budget_error(
    code: str, message: str, details: Optional[Dict[str, Any]] = None
) -> NoReturn:
    raise BudgetError(code, message, details)
