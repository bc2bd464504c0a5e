"""Statutory rules as decision trees.

Author rule trees in a small DSL, compile them into deterministic binary
decision trees with specificity-then-priority conflict resolution, audit
them for contradictions with concrete witnesses, and answer queries in
batch or interactive consultation mode.
"""

from importlib.resources import files
from pathlib import Path

__version__ = "0.1.0"

from .compiler import (  # noqa: F401
    AnalysisReport,
    CompiledTree,
    ConflictFinding,
    Leaf,
    TestNode,
    TreeStats,
    analyze,
    compile_document,
    equivalence_check,
    iter_assignments,
    traverse,
)
from .dot import export_dot  # noqa: F401
from .dsl import parse, serialize  # noqa: F401
from .engine import (  # noqa: F401
    AwaitingAnswer,
    ConsultationSession,
    Done,
    Preview,
    Trace,
    drive,
    evaluate,
    start,
)
from .errors import (  # noqa: F401
    BadVersion,
    ConflictDetected,
    Diagnostic,
    IncompleteAssignment,
    LexTreeError,
    MissingFact,
    NoNorms,
    NothingToUndo,
    ParseError,
    SchemaViolation,
    SessionFinished,
    SourceSpan,
    StateSpaceTooLarge,
    UnknownPredicate,
)
from .jsonio import export_json, import_json  # noqa: F401
from .model import (  # noqa: F401
    Answer,
    AskNode,
    Assignment,
    CategoryKind,
    CategoryNode,
    Conflict,
    Consequence,
    Decided,
    Document,
    LeafNode,
    Literal,
    Norm,
    Predicate,
    UNREGULATED,
    Unregulated,
    extract_norms,
    normalize_document,
    resolve,
    validate_document,
)


def fixture_path(name: str) -> Path:
    """Path of a bundled example document (see the fixtures directory)."""
    return Path(str(files("lextree").joinpath("fixtures", name)))
