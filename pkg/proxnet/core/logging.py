"""
Structured logging configuration with JSON support.
"""

import logging
import sys
from datetime import datetime, timezone
from typing import Any

import orjson

from proxnet.core.config import settings

_EXTRA_FIELDS = ("run_id", "iteration", "command", "alpha", "status")


class JSONFormatter(logging.Formatter):
    """Custom formatter for JSON structured logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        for field in _EXTRA_FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        # numpy scalars are not JSON-native
        return orjson.dumps(
            log_data, option=orjson.OPT_SERIALIZE_NUMPY, default=str
        ).decode("utf-8")


def setup_logging(level: str | None = None) -> None:
    """
    Configure library logging based on settings.

    Records go to stderr so that stdout carries only command output.

    Args:
        level: Optional level name overriding settings.LOG_LEVEL
    """
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, level or settings.LOG_LEVEL))

    logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)

    if settings.is_json_logging:
        formatter: logging.Formatter = JSONFormatter()
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )

    handler.setFormatter(formatter)
    logger.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance with the specified name.

    Args:
        name: Logger name (usually __name__)

    Returns:
        Configured logger instance
    """
    return logging.getLogger(name)
