"""
errors.py – Exception types raised by bpsprimes.

Every class derives from a built-in exception so callers that only know
about ``ValueError`` / ``RuntimeError`` keep working.
"""

from __future__ import annotations


class SpecParseError(ValueError):
    """Text for a surd, exponent, phase or config entry could not be parsed."""

    def __init__(self, message: str, token: str | None = None) -> None:
        super().__init__(message)
        self.token = token


class IncompatibleFieldError(ValueError):
    """An exact operation mixed two different quadratic fields."""


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class ResourceLimitError(RuntimeError):
    """A request exceeds a configured size or range limit."""


class IdentityCheckError(AssertionError):
    """An identity that must hold exactly (or to tolerance) failed."""
