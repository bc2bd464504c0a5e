"""Exception types and diagnostic records shared across the toolchain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class SourceSpan:
    """Location of a parsed entity: 1-based line and column, plus length."""

    line: int
    column: int
    length: int = 0


@dataclass(frozen=True)
class Diagnostic:
    """One problem found in an input document.

    ``code`` is a stable machine-readable identifier (part of the scripting
    contract); ``span`` is present for text inputs and absent for JSON ones.
    """

    code: str
    message: str
    span: Optional[SourceSpan] = None
    severity: str = "error"

    def render(self) -> str:
        loc = f"{self.span.line}:{self.span.column}: " if self.span else ""
        return f"{loc}{self.severity}[{self.code}]: {self.message}"

    def to_json_dict(self) -> dict:
        out: dict = {"code": self.code, "message": self.message, "severity": self.severity}
        if self.span is not None:
            out["span"] = {
                "line": self.span.line,
                "column": self.span.column,
                "length": self.span.length,
            }
        return out


class LexTreeError(Exception):
    """Base class for every error raised by this package."""


class ParseError(LexTreeError):
    """Input document rejected; carries the full diagnostic list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        head = self.diagnostics[0].render() if self.diagnostics else "invalid input"
        tail = f" (+{len(self.diagnostics) - 1} more)" if len(self.diagnostics) > 1 else ""
        super().__init__(head + tail)


class IncompleteAssignment(LexTreeError):
    """A fact required by some norm has no value in the assignment."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        super().__init__(f"assignment has no value for predicate '{predicate}'")


class MissingFact(LexTreeError):
    """Tree traversal reached a test whose predicate has no supplied fact."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        super().__init__(f"no fact supplied for predicate '{predicate}'")


class UnknownPredicate(LexTreeError):
    """A fact key does not name any declared predicate (strict mode)."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        super().__init__(f"unknown predicate '{predicate}'")


class InvalidFactValue(LexTreeError):
    """A fact value lies outside its predicate's answer domain."""

    def __init__(self, predicate: str, value):
        self.predicate = predicate
        self.value = value
        super().__init__(f"value {value!r} is not in the domain of predicate '{predicate}'")


class SessionFinished(LexTreeError):
    """The consultation already reached an outcome; no further answers."""


class NothingToUndo(LexTreeError):
    """Undo requested on a session with no answered steps."""


class NoNorms(LexTreeError):
    """The document contains no consequence leaves, so nothing to compile."""


class ConflictDetected(LexTreeError):
    """Compilation refused: the norm set contains contradictions.

    ``report`` is an AnalysisReport whose conflicts each carry a witness
    assignment reproducing the contradiction.
    """

    def __init__(self, report):
        self.report = report
        n = len(report.conflicts)
        super().__init__(f"{n} conflict{'s' if n != 1 else ''} detected among norms")


class StateSpaceTooLarge(LexTreeError):
    """Exhaustive analysis refused: assignment count exceeds the cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"assignment space has {count} states, cap is {cap}")


class BadVersion(LexTreeError):
    """Interchange payload declares an unsupported format_version."""

    def __init__(self, found):
        self.found = found
        super().__init__(f"unsupported format_version {found!r} (expected 1)")


class SchemaViolation(LexTreeError):
    """Interchange payload is structurally invalid."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")
