import json
import logging
import logging.config
from pathlib import Path
from typing import Any, Dict

from app.core.config import config

_RESERVED = {
    "name",
    "msg",
    "args",
    "created",
    "filename",
    "funcName",
    "levelname",
    "levelno",
    "lineno",
    "module",
    "msecs",
    "message",
    "pathname",
    "process",
    "processName",
    "relativeCreated",
    "thread",
    "threadName",
    "taskName",
    "exc_info",
    "exc_text",
    "stack_info",
    "run_id",
    "extra_fields",
}


class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        log_data: Dict[str, Any] = {
            "timestamp": self.formatTime(record, self.datefmt),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        if getattr(record, "run_id", ""):
            log_data["run_id"] = record.run_id  # type: ignore[attr-defined]

        if hasattr(record, "extra_fields"):
            log_data.update(record.extra_fields)  # type: ignore[attr-defined]

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        # Anything passed through extra={}
        for key, value in record.__dict__.items():
            if key not in _RESERVED:
                log_data[key] = value

        return json.dumps(log_data, default=str)


def setup_logging(level: str | None = None, log_format: str | None = None) -> None:
    LOG_LEVEL = (level or config.LOG_LEVEL).upper()
    LOG_FORMAT = log_format or config.LOG_FORMAT
    formatter = "console" if LOG_FORMAT == "console" else "json"

    formatters_config = {
        "console": {
            "format": "%(asctime)s [%(levelname)s] %(name)s: %(message)s",
            "datefmt": "%Y-%m-%d %H:%M:%S",
        },
        "json": {
            "()": JSONFormatter,
            "datefmt": "%Y-%m-%dT%H:%M:%S",
        },
    }

    handlers_config: Dict[str, Dict[str, Any]] = {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": formatter,
            "stream": "ext://sys.stderr",
        },
    }
    app_handlers = ["console"]
    run_handlers = ["console"]

    if config.LOG_TO_FILE:
        log_dir = Path(config.LOG_DIR)
        log_dir.mkdir(parents=True, exist_ok=True)
        handlers_config["file_app"] = {
            "class": "logging.FileHandler",
            "filename": str(log_dir / config.LOG_FILE_APP),
            "mode": "a",
            "formatter": formatter,
        }
        # run manifests are always JSON so they can be replayed
        handlers_config["file_run"] = {
            "class": "logging.FileHandler",
            "filename": str(log_dir / config.LOG_FILE_RUN),
            "mode": "a",
            "formatter": "json",
        }
        app_handlers.append("file_app")
        run_handlers.append("file_run")

    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": formatters_config,
            "handlers": handlers_config,
            "root": {
                "level": "WARNING",
                "handlers": ["console"],
            },
            "loggers": {
                "app": {
                    "level": LOG_LEVEL,
                    "handlers": app_handlers,
                    "propagate": False,
                },
                "app.run": {
                    "level": "INFO",
                    "handlers": run_handlers,
                    "propagate": False,
                },
                "uvicorn.error": {
                    "level": "INFO",
                },
                "uvicorn.access": {
                    "level": "INFO",
                },
            },
        }
    )
