"""Shared error types.

Every error raised by the library maps to exactly one wire-level code so the
HTTP service and the CLI can report failures uniformly.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all library errors."""

    code = "validation"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class NotFoundError(WorkbenchError):
    code = "not_found"


class ConflictError(WorkbenchError):
    """Optimistic-concurrency failure: someone else edited first."""

    code = "conflict"


class ValidationError(WorkbenchError):
    code = "validation"


class DegenerateInputError(WorkbenchError):
    """Structurally valid input the operation cannot meaningfully process
    (e.g. fewer than two non-empty sequences for a distance matrix)."""

    code = "degenerate_input"
