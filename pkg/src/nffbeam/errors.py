"""Exception hierarchy shared by all nffbeam modules."""

from __future__ import annotations


class NffBeamError(Exception):
    """Base class for every error raised by nffbeam."""


class InvalidInputError(NffBeamError, ValueError):
    """An argument violates a documented precondition."""


class SingularityError(NffBeamError, ArithmeticError):
    """An observation point sits on (or too close to) a source point.

    ``point_index`` holds the offending grid index when known.
    """

    def __init__(self, message: str, point_index: int | None = None):
        super().__init__(message)
        self.point_index = point_index


class ConfigError(InvalidInputError):
    """Scenario configuration could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column
