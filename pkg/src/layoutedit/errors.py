"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class LayoutEditError(Exception):
    """Base class for all domain errors raised by this package."""


class DesignParseError(LayoutEditError):
    """Raised when a design document is not well-formed."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class DesignValidationError(LayoutEditError):
    """Raised when a parsed document violates a schema invariant.

    ``issues`` is a list of (path, message) pairs so callers can report
    every offending element at once.
    """

    def __init__(self, issues: list[tuple[str, str]]):
        self.issues = issues
        super().__init__("; ".join(f"{p}: {m}" for p, m in issues))


class GrammarError(LayoutEditError):
    """Raised when an editing-operation string does not match the grammar."""

    def __init__(self, message: str, token: str | None = None):
        self.token = token
        super().__init__(message if token is None else f"{message} (token: {token!r})")


class GraphError(LayoutEditError):
    """Raised for relation-graph construction or lookup failures."""


class SynthesisError(LayoutEditError):
    """Raised when an editing operation cannot be synthesized."""


class SolverError(LayoutEditError):
    """Raised for infeasible hard operations handed to the layout solver."""


class EvaluationError(LayoutEditError):
    """Raised when an evaluation case is inconsistent (e.g. dangling edge)."""


class ModelOutputError(LayoutEditError):
    """Raised when an external model response cannot be parsed or repaired.

    Retains the raw response text plus the indices that were missing or
    broken, for offline inspection.
    """

    def __init__(self, message: str, raw: str, missing: list[int] | None = None):
        self.raw = raw
        self.missing = missing or []
        super().__init__(message)


class BackendError(LayoutEditError):
    """Raised when an editor backend fails after exhausting retries."""

    def __init__(self, message: str, exchanges: list | None = None):
        self.exchanges = exchanges or []
        super().__init__(message)


class TranslationError(LayoutEditError):
    """Raised when a natural-language instruction cannot be translated."""

    def __init__(self, message: str, raw: str = ""):
        self.raw = raw
        super().__init__(message)


class StoreError(LayoutEditError):
    """Raised for persistence failures in the record store."""
