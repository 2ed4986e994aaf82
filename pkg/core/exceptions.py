"""Custom exceptions for the planning library and benchmark harness."""

import json
from typing import Optional, Dict, Any

from pydantic import ValidationError


class NavigationError(Exception):
    """Base exception for all planning and harness errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class InsideBallError(NavigationError):
    """Raised when a tangent is requested from a point inside the ball."""

    def __init__(self, message: str, distance: float, radius: float, **kwargs):
        super().__init__(message, **kwargs)
        self.distance = distance
        self.radius = radius


class DegenerateWallError(NavigationError):
    """Raised when a wall segment has coincident endpoints."""
    pass


class KinematicViolationError(NavigationError):
    """Raised when an action heading lies outside the reachable heading arc."""
    pass


class InvalidStateError(NavigationError):
    """Raised when a state value violates its invariants."""
    pass


class PlacementFailureError(NavigationError):
    """Raised when obstacles cannot be placed in the workspace."""

    def __init__(self, message: str, attempts: int, **kwargs):
        super().__init__(message, **kwargs)
        self.attempts = attempts


class EmptyGroupError(NavigationError):
    """Raised when metrics are requested for an empty set of records."""
    pass


class ConfigValidationError(NavigationError):
    """Raised when a scenario or sweep configuration is invalid."""
    pass


class CLIValidationError(NavigationError):
    """Raised when a command-line flag is invalid."""

    def __init__(self, message: str, flag: Optional[str] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.flag = flag


class ReplayError(NavigationError):
    """Raised when a recorded episode cannot be replayed."""
    pass


class SweepInterruptedError(NavigationError):
    """Raised when a sweep stops early; finished records are already on disk."""

    def __init__(self, message: str, persisted: int, **kwargs):
        super().__init__(message, **kwargs)
        self.persisted = persisted


def to_navigation_error(error: Exception) -> NavigationError:
    """
    Convert foreign exceptions to our custom exceptions.

    Args:
        error: Original exception raised by a library or the OS

    Returns:
        Appropriate custom exception
    """
    if isinstance(error, NavigationError):
        return error

    error_message = str(error)

    if isinstance(error, ValidationError):
        fields = [".".join(str(p) for p in e["loc"]) for e in error.errors()]
        return ConfigValidationError(
            f"Invalid configuration: {error_message}",
            {"original_error": type(error).__name__, "fields": fields}
        )
    elif isinstance(error, json.JSONDecodeError):
        return ConfigValidationError(
            f"Malformed JSON at line {error.lineno}: {error.msg}",
            {"original_error": type(error).__name__}
        )
    elif isinstance(error, FileNotFoundError):
        return ConfigValidationError(
            f"File not found: {error.filename or error_message}",
            {"original_error": type(error).__name__}
        )
    elif isinstance(error, OSError):
        return NavigationError(f"I/O error: {error_message}", {"original_error": type(error).__name__})
    elif isinstance(error, ValueError):
        return ConfigValidationError(f"Invalid value: {error_message}", {"original_error": type(error).__name__})

    # Default fallback
    return NavigationError(f"Unexpected error: {error_message}", {"original_error": type(error).__name__})
