"""
Custom exception classes for the library.

Every exception carries the process exit code the CLI uses when it reaches the top level.
"""

from typing import Any


class ProxNetException(Exception):
    """Base exception class for proxnet."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class InvalidParameterException(ProxNetException):
    """Exception raised when a numeric parameter violates its documented range."""

    def __init__(
        self, message: str = "Invalid parameter", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class InvalidActivationException(ProxNetException):
    """Exception raised when an activation cannot be built (unknown key or broken closure rule)."""

    def __init__(
        self, message: str = "Invalid activation", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class DimensionMismatchException(ProxNetException):
    """Exception raised when vector or matrix shapes do not chain."""

    def __init__(
        self, message: str = "Dimension mismatch", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class PotentialUnavailableException(ProxNetException):
    """Exception raised when a potential is requested for a combinator node."""

    def __init__(
        self,
        message: str = "Potential is not available for combinator activations",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class BracketingException(ProxNetException):
    """Exception raised when the prox oracle cannot bracket its minimizer."""

    def __init__(
        self, message: str = "Cannot bracket minimizer", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class ScheduleException(ProxNetException):
    """Exception raised when a relaxation parameter leaves its declared interval."""

    def __init__(
        self,
        message: str = "Relaxation parameter outside declared interval",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class MissingColumnException(ProxNetException):
    """Exception raised when a trace lacks a column a diagnostic needs."""

    def __init__(
        self, message: str = "Trace column missing", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)


class ConfigException(ProxNetException):
    """Exception raised when a config, matrix or point file is malformed or missing."""

    def __init__(
        self, message: str = "Malformed configuration", details: dict[str, Any] | None = None
    ) -> None:
        super().__init__(message, exit_code=1, details=details)
