"""Exception types shared across the package."""

from __future__ import annotations


class SpecFeedbackError(Exception):
    """Base class for all package errors."""


class UnknownProposition(SpecFeedbackError, ValueError):
    def __init__(self, name: str, position: int | None = None, line: int | None = None):
        self.name = name
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"column {position}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"unknown proposition {name!r}{suffix}")


class LtlSyntaxError(SpecFeedbackError, ValueError):
    def __init__(self, message: str, position: int, expected: str | None = None, line: int | None = None):
        self.message = message
        self.position = position
        self.expected = expected
        self.line = line
        text = f"{message} at column {position}"
        if line is not None:
            text = f"line {line}: {text}"
        if expected:
            text += f" (expected {expected})"
        super().__init__(text)


class StepSyntaxError(SpecFeedbackError, ValueError):
    def __init__(self, message: str, line: int, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


class TooManyProps(SpecFeedbackError, ValueError):
    pass


class DuplicateState(SpecFeedbackError, ValueError):
    pass


class EmptyStepList(SpecFeedbackError, ValueError):
    pass


class PropMismatch(SpecFeedbackError, ValueError):
    pass


class ExplosionGuard(SpecFeedbackError, RuntimeError):
    pass


class FormulaTooLarge(SpecFeedbackError, ValueError):
    pass


class IncompleteWorld(SpecFeedbackError, ValueError):
    pass


class BackendError(SpecFeedbackError):
    pass


class EndpointUnreachable(BackendError):
    pass


class AuthError(BackendError):
    pass


class MalformedResponse(BackendError):
    pass
