"""
Error types for the coherent-state resolution library.

Library functions validate their inputs at the boundary and raise one of
these; diagnostics report failed properties as data instead of raising.
"""

from typing import Optional


class ResolutionError(Exception):
    """Base class for every error raised by this package."""


class RejectedInputError(ResolutionError, ValueError):
    """Input outside an operation's domain (non-finite, negative, mismatched)."""


class AccuracyError(ResolutionError):
    """A numerical procedure could not reach its requested tolerance."""

    def __init__(self, message: str, best_estimate: float,
                 error_estimate: Optional[float] = None, intervals: int = 0):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate
        self.intervals = intervals


class StudyConfigError(ResolutionError):
    """Unreadable or invalid study configuration, vector spec or sweep."""
