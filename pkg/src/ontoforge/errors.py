"""Exception hierarchy shared by all ontoforge modules.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP API can surface failures uniformly.
"""

from __future__ import annotations


class OntoforgeError(Exception):
    """Base class; ``code`` is a stable kebab-case identifier."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidArgumentError(OntoforgeError):
    code = "invalid-argument"


class UnknownConceptError(OntoforgeError):
    code = "unknown-concept"


class CycleViolationError(OntoforgeError):
    """Raised when a hierarchical edge would close a cycle.

    ``path`` lists the concept ids along the would-be cycle, starting at the
    source of the rejected edge.
    """

    code = "cycle-violation"

    def __init__(self, message: str, path: list[str]):
        super().__init__(message)
        self.path = path


class IngestFailureError(OntoforgeError):
    """Every source in an ingest batch failed; ``causes`` maps source -> reason."""

    code = "ingest-failure"

    def __init__(self, message: str, causes: dict[str, str]):
        super().__init__(message)
        self.causes = causes


class EmptyCorpusError(OntoforgeError):
    code = "empty-corpus"


class XmlParseError(OntoforgeError):
    code = "parse-error"

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.line = line
        self.column = column


class IntegrityError(OntoforgeError):
    code = "integrity-error"


class ValidationError(OntoforgeError):
    code = "validation-error"


class PlanError(OntoforgeError):
    code = "plan-error"


class BusyError(OntoforgeError):
    code = "busy-error"
