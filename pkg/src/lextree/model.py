"""Domain model for statutory rule trees.

A document declares predicates (askable facts) and consequences, then
arranges them in a taxonomy tree whose leaves name legal outcomes. Norms
are the root-to-leaf paths of that tree: a set of predicate literals paired
with a consequence. ``resolve`` is the reference semantics everything else
is checked against: the most specific applicable norms win, explicit
priority breaks ties among incomparable ones, and anything left over is a
reported conflict, never a silent choice.

All values are immutable after construction; every operation here is a
pure function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import Diagnostic, IncompleteAssignment

Answer = Union[bool, str]

#: Answer domain of every boolean predicate, in branching order.
BOOL_DOMAIN: tuple[Answer, ...] = (True, False)

DEFAULT_RANK = 100
DEFAULT_PRIORITY = 100

_IDENT_RE = re.compile(r"[a-z_][a-z0-9_]*\Z")

#: Reserved consequence id for fact regions covered by no norm. Authored ids
#: are lowercase by grammar, so this can never collide with a declared one.
UNREGULATED_ID = "UNREGULATED"


class CategoryKind(Enum):
    """Taxonomy slot a category node occupies.

    The four built-in kinds classify a legal relation; CUSTOM covers any
    other structural grouping and is identified by its label.
    """

    SUBJECT = "subject"
    OBJECT = "object"
    CONTENTS = "contents"
    LIFECYCLE = "lifecycle"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Predicate:
    """An askable fact with a boolean or enumerated answer domain.

    ``gate`` marks qualification checks that must be asked before content
    checks; ``rank`` orders predicates within the same gate class (lower is
    asked earlier).
    """

    id: str
    prompt: str
    options: Optional[tuple[str, ...]] = None
    gate: bool = False
    rank: int = DEFAULT_RANK

    def __post_init__(self):
        if not _IDENT_RE.match(self.id):
            raise ValueError(f"bad predicate id {self.id!r}")
        if self.rank < 0:
            raise ValueError(f"predicate {self.id}: rank must be >= 0")
        if self.options is not None:
            if len(self.options) < 2:
                raise ValueError(f"predicate {self.id}: enumerated domain needs >= 2 values")
            if len(set(self.options)) != len(self.options):
                raise ValueError(f"predicate {self.id}: enumerated values must be distinct")
            for v in self.options:
                if not _IDENT_RE.match(v):
                    raise ValueError(f"predicate {self.id}: bad domain value {v!r}")

    @property
    def is_boolean(self) -> bool:
        return self.options is None

    @property
    def domain(self) -> tuple[Answer, ...]:
        """All possible answers, in declared (branching) order."""
        return BOOL_DOMAIN if self.options is None else self.options


@dataclass(frozen=True)
class Consequence:
    """A legal consequence a leaf can name. Lower priority number wins ties."""

    id: str
    text: str
    priority: int = DEFAULT_PRIORITY

    def __post_init__(self):
        if self.id != UNREGULATED_ID and not _IDENT_RE.match(self.id):
            raise ValueError(f"bad consequence id {self.id!r}")
        if not self.text:
            raise ValueError(f"consequence {self.id}: text must be non-empty")
        if self.priority < 0:
            raise ValueError(f"consequence {self.id}: priority must be >= 0")


#: Built-in outcome for assignments no norm covers.
UNREGULATED = Consequence(UNREGULATED_ID, "No applicable rule", DEFAULT_PRIORITY)


@dataclass(frozen=True)
class Literal:
    """One atomic condition: a predicate paired with a required answer."""

    predicate: str
    value: Answer


@dataclass(frozen=True)
class CategoryNode:
    """Structural grouping node; contributes nothing to norm conditions.

    Node ids are deterministic labels for traces and reports; they do not
    take part in structural equality.
    """

    id: str = field(compare=False)
    kind: CategoryKind
    label: str
    children: tuple["Node", ...]

    def __post_init__(self):
        if not self.label:
            raise ValueError("category label must be non-empty")
        if not self.children:
            raise ValueError(f"category {self.label!r} must have at least one child")


@dataclass(frozen=True)
class AskNode:
    """Questions a predicate; one branch per domain answer."""

    id: str = field(compare=False)
    predicate: str
    branches: tuple[tuple[Answer, "Node"], ...]

    def __post_init__(self):
        if not self.branches:
            raise ValueError(f"ask {self.predicate}: needs at least one branch")

    def branch(self, answer: Answer) -> "Node":
        for a, child in self.branches:
            if a == answer:
                return child
        raise KeyError(answer)


@dataclass(frozen=True)
class LeafNode:
    """Terminal node carrying a consequence id."""

    id: str = field(compare=False)
    consequence: str


Node = Union[CategoryNode, AskNode, LeafNode]


@dataclass(frozen=True)
class Document:
    """A complete authored rule tree plus its declarations.

    Declaration order of predicates and consequences is semantic: it breaks
    ties in compilation order, so it is preserved everywhere.
    """

    title: str
    predicates: tuple[Predicate, ...]
    consequences: tuple[Consequence, ...]
    root: Node
    default_consequence: Optional[str] = None

    def predicate(self, pid: str) -> Predicate:
        for p in self.predicates:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def consequence(self, cid: str) -> Consequence:
        if cid == UNREGULATED_ID:
            return UNREGULATED
        for c in self.consequences:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def predicate_table(self) -> dict[str, Predicate]:
        return {p.id: p for p in self.predicates}

    def consequence_table(self) -> dict[str, Consequence]:
        return {c.id: c for c in self.consequences}


def iter_nodes(root: Node) -> Iterator[Node]:
    """Yield nodes in preorder, branches in stored order."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, CategoryNode):
            stack.extend(reversed(node.children))
        elif isinstance(node, AskNode):
            stack.extend(child for _, child in reversed(node.branches))


def count_leaves(root: Node) -> int:
    return sum(1 for n in iter_nodes(root) if isinstance(n, LeafNode))


def question_for(predicate: Predicate, value: Answer) -> str:
    """The yes/no question a compiled test for ``predicate = value`` asks."""
    if predicate.is_boolean:
        return predicate.prompt
    return f"{predicate.prompt.rstrip('?').rstrip()}: {value}?"


@dataclass(frozen=True)
class Assignment:
    """A set of facts: predicate id mapped to an answer in its domain."""

    facts: Mapping[str, Answer]

    @classmethod
    def of(cls, **facts: Answer) -> "Assignment":
        return cls(dict(facts))

    def value(self, pid: str) -> Answer:
        return self.facts[pid]

    def has(self, pid: str) -> bool:
        return pid in self.facts

    def is_complete_for(self, predicates: Iterable[Predicate]) -> bool:
        return all(p.id in self.facts for p in predicates)

    def to_json_dict(self) -> dict:
        return dict(self.facts)


@dataclass(frozen=True)
class Norm:
    """A rule extracted from one root-to-leaf path.

    ``priority`` is copied from the norm's consequence so that resolution
    needs no side table. ``origin`` records the source path of node ids.
    """

    id: str
    condition: frozenset[Literal]
    consequence: str
    priority: int = DEFAULT_PRIORITY
    origin: tuple[str, ...] = ()

    @classmethod
    def of(cls, id: str, condition: Mapping[str, Answer], consequence: str,
           priority: int = DEFAULT_PRIORITY) -> "Norm":
        lits = frozenset(Literal(p, v) for p, v in condition.items())
        return cls(id=id, condition=lits, consequence=consequence, priority=priority)

    def predicates(self) -> set[str]:
        return {lit.predicate for lit in self.condition}


@dataclass(frozen=True)
class UnsatisfiablePath:
    """A root-to-leaf path requiring two different answers from one predicate."""

    origin: tuple[str, ...]
    predicate: str
    message: str


@dataclass(frozen=True)
class Decided:
    """Resolution outcome: exactly one consequence prevails."""

    consequence: str
    winners: tuple[Norm, ...]


@dataclass(frozen=True)
class Unregulated:
    """Resolution outcome: no norm applies to the assignment."""


@dataclass(frozen=True)
class Conflict:
    """Resolution outcome: incomparable surviving norms disagree."""

    norms: tuple[Norm, ...]


Resolution = Union[Decided, Unregulated, Conflict]


def extract_norms(doc: Document) -> tuple[list[Norm], list[UnsatisfiablePath]]:
    """Extract one norm per reachable leaf of the document's tree.

    Category nodes contribute nothing; each ask branch taken contributes one
    literal. A repeated identical literal is kept once; a path that needs
    two different answers from the same predicate is dropped and reported.
    """
    consequences = doc.consequence_table()
    norms: list[Norm] = []
    warnings: list[UnsatisfiablePath] = []

    def walk(node: Node, path: tuple[str, ...], literals: dict[str, Answer],
             clash: Optional[str]) -> None:
        path = path + (node.id,)
        if isinstance(node, CategoryNode):
            for child in node.children:
                walk(child, path, literals, clash)
        elif isinstance(node, AskNode):
            for answer, child in node.branches:
                prev = literals.get(node.predicate)
                if prev is not None and prev != answer:
                    walk(child, path, literals, clash or node.predicate)
                else:
                    walk(child, path, {**literals, node.predicate: answer}, clash)
        else:
            if clash is not None:
                warnings.append(UnsatisfiablePath(
                    origin=path,
                    predicate=clash,
                    message=f"path requires two different answers for '{clash}'",
                ))
                return
            condition = frozenset(Literal(p, v) for p, v in literals.items())
            consequence = consequences.get(node.consequence, UNREGULATED)
            norms.append(Norm(
                id=f"norm_{node.id}",
                condition=condition,
                consequence=node.consequence,
                priority=consequence.priority,
                origin=path,
            ))

    walk(doc.root, (), {}, None)
    return norms, warnings


def is_more_specific(a: Norm, b: Norm) -> bool:
    """True when ``a`` beats ``b``: b's condition is a strict subset of a's."""
    return b.condition < a.condition


def winnow(applicable: list[Norm]) -> list[Norm]:
    """Reduce applicable norms to the surviving candidates.

    Keeps the maximal elements under strict-superset specificity, then those
    of minimal priority number. Input order is preserved.
    """
    maximal = [n for n in applicable
               if not any(is_more_specific(m, n) for m in applicable)]
    best = min(n.priority for n in maximal)
    return [n for n in maximal if n.priority == best]


def resolve(norms: Iterable[Norm], assignment: Assignment) -> Resolution:
    """Decide which consequence the norms assign to a complete fact set.

    The assignment must cover every predicate referenced by any norm;
    raises IncompleteAssignment otherwise. Deterministic for equal inputs.
    """
    norms = list(norms)
    referenced = sorted({lit.predicate for n in norms for lit in n.condition})
    for pid in referenced:
        if not assignment.has(pid):
            raise IncompleteAssignment(pid)

    applicable = [
        n for n in norms
        if all(assignment.value(lit.predicate) == lit.value for lit in n.condition)
    ]
    if not applicable:
        return Unregulated()
    survivors = winnow(applicable)
    outcomes = {n.consequence for n in survivors}
    if len(outcomes) == 1:
        return Decided(consequence=survivors[0].consequence, winners=tuple(survivors))
    return Conflict(norms=tuple(survivors))


# ---------------------------------------------------------------------------
# Document validation and normalization
# ---------------------------------------------------------------------------

def validate_document(doc: Document) -> list[Diagnostic]:
    """Check every document invariant; spans are absent (not a text input)."""
    diags: list[Diagnostic] = []

    def err(code: str, message: str) -> None:
        diags.append(Diagnostic(code=code, message=message))

    seen_ids: set[str] = set()
    for p in doc.predicates:
        if p.id in seen_ids:
            err("DuplicateId", f"duplicate declaration id '{p.id}'")
        seen_ids.add(p.id)
    for c in doc.consequences:
        if c.id == UNREGULATED_ID:
            err("DuplicateId", f"'{UNREGULATED_ID}' is reserved and cannot be declared")
        if c.id in seen_ids:
            err("DuplicateId", f"duplicate declaration id '{c.id}'")
        seen_ids.add(c.id)

    predicates = doc.predicate_table()
    consequences = doc.consequence_table()

    if doc.default_consequence is not None:
        if doc.default_consequence not in consequences:
            err("UnknownConsequence",
                f"default consequence '{doc.default_consequence}' is not declared")
        else:
            # Canonical position and priority are forced by the authoring
            # grammar; enforcing them keeps serialization lossless.
            default = consequences[doc.default_consequence]
            if doc.consequences and doc.consequences[0].id != default.id:
                err("BadDefault", "default consequence must be declared first")
            if default.priority != DEFAULT_PRIORITY:
                err("BadDefault", "default consequence cannot carry an explicit priority")

    seen_nodes: set[str] = set()
    for node in iter_nodes(doc.root):
        if node.id in seen_nodes:
            err("DuplicateId", f"node id '{node.id}' appears more than once")
        seen_nodes.add(node.id)
        if isinstance(node, AskNode):
            pred = predicates.get(node.predicate)
            if pred is None:
                err("UnknownPredicate", f"ask references undeclared predicate '{node.predicate}'")
                continue
            seen_answers: list[Answer] = []
            for answer, _child in node.branches:
                if answer not in pred.domain:
                    err("DomainMismatch",
                        f"branch answer {answer!r} is not in the domain of '{pred.id}'")
                elif answer in seen_answers:
                    err("DuplicateBranch",
                        f"duplicate branch {answer!r} on ask '{pred.id}'")
                seen_answers.append(answer)
            missing = [v for v in pred.domain if v not in seen_answers]
            if missing:
                names = ", ".join(_answer_text(v) for v in missing)
                err("NonExhaustiveBranches",
                    f"ask '{pred.id}' is missing branches for: {names}")
        elif isinstance(node, LeafNode):
            if node.consequence not in consequences:
                err("UnknownConsequence",
                    f"leaf references undeclared consequence '{node.consequence}'")
    return diags


def _answer_text(value: Answer) -> str:
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def normalize_document(doc: Document) -> Document:
    """Return the canonical form: branches in domain order, preorder node ids."""
    predicates = doc.predicate_table()
    counter = [0]

    def relabel(node: Node) -> Node:
        counter[0] += 1
        nid = f"n{counter[0]}"
        if isinstance(node, CategoryNode):
            return CategoryNode(id=nid, kind=node.kind, label=node.label,
                                children=tuple(relabel(c) for c in node.children))
        if isinstance(node, AskNode):
            domain = predicates[node.predicate].domain
            ordered = sorted(node.branches, key=lambda br: domain.index(br[0]))
            return AskNode(id=nid, predicate=node.predicate,
                           branches=tuple((a, relabel(c)) for a, c in ordered))
        return LeafNode(id=nid, consequence=node.consequence)

    return Document(
        title=doc.title,
        predicates=doc.predicates,
        consequences=doc.consequences,
        root=relabel(doc.root),
        default_consequence=doc.default_consequence,
    )
