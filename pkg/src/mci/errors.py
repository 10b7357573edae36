"""Exception types shared across the toolkit."""

from __future__ import annotations


class MCIError(Exception):
    """Base class for every error raised by this package."""


class GraphFormatError(MCIError, ValueError):
    """Malformed edge-list or solution text.

    ``line`` is 1-based, or ``None`` when the problem is not tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CycleError(GraphFormatError):
    """The input graph contains a directed cycle."""


class PreconditionError(MCIError, ValueError):
    """A solver or analysis was called outside its stated domain."""


class SolverGuardError(MCIError, RuntimeError):
    """Enumeration would examine more candidate sets than the configured cap."""

    def __init__(self, estimate: int, cap: int):
        self.estimate = estimate
        self.cap = cap
        super().__init__(f"enumeration of {estimate} candidate sets exceeds cap {cap}")
