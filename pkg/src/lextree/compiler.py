"""Lower a document's norm set into a binary decision tree.

The builder splits the fact space region by region (a region is a partial
assignment, initially empty). When every norm is decided within a region the
winner is resolved with the same specificity-then-priority semantics as
``model.resolve`` and a leaf is emitted; otherwise the most urgent predicate
is chosen (gate checks first, then ascending rank, then declaration order)
and its domain is lowered to a cascade of yes/no tests in domain order.

Regions where surviving norms disagree are contradictions: compilation
refuses and reports each one with a concrete witness assignment. Regions no
norm covers compile to an explicit default leaf instead of failing, so
incompleteness stays analyzable.

No size optimization is attempted; the test order is the legally meaningful
one, not the shortest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Union

from .errors import ConflictDetected, NoNorms, StateSpaceTooLarge
from .model import (
    Answer,
    Assignment,
    Conflict,
    Consequence,
    Decided,
    Document,
    Norm,
    Predicate,
    UNREGULATED,
    UNREGULATED_ID,
    Unregulated,
    count_leaves,
    extract_norms,
    resolve,
    winnow,
)

#: Exhaustive analysis refuses beyond this many complete assignments.
DEFAULT_STATE_CAP = 10**6


@dataclass(frozen=True)
class TestNode:
    """Internal node: asks whether ``predicate`` equals ``value``."""

    __test__ = False  # keep pytest from collecting this as a test class

    predicate: str
    value: Answer
    yes: int
    no: int


@dataclass(frozen=True)
class Leaf:
    """Terminal node: the outcome for every assignment reaching it."""

    consequence: str
    winning_norm: Optional[str] = None


BinNode = Union[TestNode, Leaf]


@dataclass(frozen=True)
class TreeStats:
    internal: int
    leaves: int
    depth: int

    def to_json_dict(self) -> dict:
        return {"internal": self.internal, "leaves": self.leaves, "depth": self.depth}


@dataclass(frozen=True)
class CompiledTree:
    """An evaluable binary decision tree plus the tables it tests against."""

    source_title: str
    predicates: tuple[Predicate, ...]
    consequences: tuple[Consequence, ...]
    nodes: tuple[BinNode, ...]
    root: int

    def node(self, index: int) -> BinNode:
        return self.nodes[index]

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

    def stats(self) -> TreeStats:
        internal = sum(1 for n in self.nodes if isinstance(n, TestNode))
        leaves = len(self.nodes) - internal

        def depth(i: int) -> int:
            node = self.nodes[i]
            if isinstance(node, Leaf):
                return 0
            return 1 + max(depth(node.yes), depth(node.no))

        return TreeStats(internal=internal, leaves=leaves, depth=depth(self.root))


@dataclass(frozen=True)
class ConflictFinding:
    """Norm ids that clash, with a complete assignment reproducing it."""

    norms: tuple[str, ...]
    witness: Assignment


@dataclass(frozen=True)
class AnalysisReport:
    """Static audit of a document's norm set.

    ``shadowed`` lists norms that never win any complete assignment;
    ``unregulated_regions`` compactly describe assignments no norm covers
    (fixed facts only; unmentioned predicates may take any value).
    """

    conflicts: tuple[ConflictFinding, ...]
    shadowed: tuple[str, ...]
    unregulated_regions: tuple[Assignment, ...]
    stats: TreeStats
    assignments_checked: int = 0

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "conflicts": [
                {"norms": list(c.norms), "witness": c.witness.to_json_dict()}
                for c in self.conflicts
            ],
            "shadowed": list(self.shadowed),
            "unregulated_regions": [r.to_json_dict() for r in self.unregulated_regions],
            "stats": self.stats.to_json_dict(),
            "assignments_checked": self.assignments_checked,
        }

    def render_text(self) -> str:
        lines = [
            f"conflicts: {len(self.conflicts)}",
        ]
        for c in self.conflicts:
            facts = ", ".join(f"{k}={_fmt(v)}" for k, v in c.witness.facts.items())
            lines.append(f"  - {' vs '.join(c.norms)}  [witness: {facts}]")
        lines.append(f"shadowed norms: {len(self.shadowed)}")
        for nid in self.shadowed:
            lines.append(f"  - {nid}")
        lines.append(f"unregulated regions: {len(self.unregulated_regions)}")
        for region in self.unregulated_regions:
            if region.facts:
                facts = ", ".join(f"{k}={_fmt(v)}" for k, v in region.facts.items())
            else:
                facts = "(every assignment)"
            lines.append(f"  - {facts}")
        lines.append(
            f"tree: {self.stats.internal} internal, {self.stats.leaves} leaves, "
            f"depth {self.stats.depth}"
        )
        lines.append(f"assignments checked: {self.assignments_checked}")
        return "\n".join(lines) + "\n"


def _fmt(value: Answer) -> str:
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def _falsified(norm: Norm, region: dict[str, Answer]) -> bool:
    return any(
        lit.predicate in region and region[lit.predicate] != lit.value
        for lit in norm.condition
    )


def _entailed(norm: Norm, region: dict[str, Answer]) -> bool:
    return all(
        lit.predicate in region and region[lit.predicate] == lit.value
        for lit in norm.condition
    )


def _complete(region: dict[str, Answer], predicates: tuple[Predicate, ...]) -> Assignment:
    facts = dict(region)
    for p in predicates:
        if p.id not in facts:
            facts[p.id] = p.domain[0]
    return Assignment({p.id: facts[p.id] for p in predicates})


class _Builder:
    def __init__(self, doc: Document):
        self.doc = doc
        self.norms, self.warnings = extract_norms(doc)
        self.order = {p.id: i for i, p in enumerate(doc.predicates)}
        self.table = doc.predicate_table()
        self.fallback = doc.default_consequence or UNREGULATED_ID
        self.nodes: list[Optional[BinNode]] = []
        self.conflicts: list[ConflictFinding] = []

    def build(self) -> int:
        return self._region(dict())

    def _region(self, region: dict[str, Answer]) -> int:
        live = [n for n in self.norms if not _falsified(n, region)]
        pending = sorted(
            {
                lit.predicate
                for n in live
                for lit in n.condition
                if lit.predicate not in region
            },
            key=lambda pid: (not self.table[pid].gate, self.table[pid].rank, self.order[pid]),
        )
        if not pending:
            return self._leaf(live, region)

        pid = pending[0]
        domain = self.table[pid].domain
        return self._cascade(pid, domain, region)

    def _cascade(self, pid: str, values: tuple[Answer, ...], region: dict[str, Answer]) -> int:
        if len(values) == 1:
            return self._region({**region, pid: values[0]})
        slot = self._alloc()
        yes = self._region({**region, pid: values[0]})
        no = self._cascade(pid, values[1:], region)
        self.nodes[slot] = TestNode(predicate=pid, value=values[0], yes=yes, no=no)
        return slot

    def _leaf(self, live: list[Norm], region: dict[str, Answer]) -> int:
        slot = self._alloc()
        if not live:
            self.nodes[slot] = Leaf(consequence=self.fallback)
            return slot
        survivors = winnow(live)
        outcomes = {n.consequence for n in survivors}
        if len(outcomes) > 1:
            witness = _complete(region, self.doc.predicates)
            self.conflicts.append(ConflictFinding(
                norms=tuple(sorted(n.id for n in survivors)),
                witness=witness,
            ))
            self.nodes[slot] = Leaf(consequence=UNREGULATED_ID)
            return slot
        winning = survivors[0].id if len(survivors) == 1 else None
        self.nodes[slot] = Leaf(consequence=survivors[0].consequence, winning_norm=winning)
        return slot

    def _alloc(self) -> int:
        self.nodes.append(None)
        return len(self.nodes) - 1


def _verify_structure(nodes: tuple[BinNode, ...], root: int) -> None:
    reachable: set[int] = set()
    stack = [root]
    while stack:
        i = stack.pop()
        if i in reachable:
            raise AssertionError("compiled tree shares a node; must be a strict tree")
        reachable.add(i)
        node = nodes[i]
        if isinstance(node, TestNode):
            stack.extend((node.yes, node.no))
    if len(reachable) != len(nodes):
        raise AssertionError("compiled tree has unreachable nodes")
    leaves = sum(1 for n in nodes if isinstance(n, Leaf))
    if len(nodes) != 2 * leaves - 1:
        raise AssertionError("binary invariant violated: nodes != 2*leaves - 1")


def compile_document(doc: Document) -> CompiledTree:
    """Compile a valid document into a binary decision tree.

    Raises NoNorms when the document has no leaves, and ConflictDetected
    (carrying a report with witnesses) when the norm set contradicts itself.
    Pure: equal documents compile to equal trees.
    """
    if count_leaves(doc.root) == 0:
        raise NoNorms("document has no consequence leaves")
    builder = _Builder(doc)
    root = builder.build()
    if builder.conflicts:
        report = AnalysisReport(
            conflicts=_dedupe_conflicts(builder.conflicts),
            shadowed=(),
            unregulated_regions=(),
            stats=_stats_of(builder.nodes, root),
        )
        raise ConflictDetected(report)
    nodes = tuple(n for n in builder.nodes if n is not None)
    assert len(nodes) == len(builder.nodes)
    _verify_structure(nodes, root)
    return CompiledTree(
        source_title=doc.title,
        predicates=doc.predicates,
        consequences=doc.consequences,
        nodes=nodes,
        root=root,
    )


def _stats_of(nodes: list[Optional[BinNode]], root: int) -> TreeStats:
    filled = tuple(n if n is not None else Leaf(UNREGULATED_ID) for n in nodes)
    internal = sum(1 for n in filled if isinstance(n, TestNode))

    def depth(i: int) -> int:
        node = filled[i]
        if isinstance(node, Leaf):
            return 0
        return 1 + max(depth(node.yes), depth(node.no))

    return TreeStats(internal=internal, leaves=len(filled) - internal, depth=depth(root))


def _dedupe_conflicts(found: list[ConflictFinding]) -> tuple[ConflictFinding, ...]:
    out: list[ConflictFinding] = []
    seen: set[tuple[str, ...]] = set()
    for c in found:
        if c.norms not in seen:
            seen.add(c.norms)
            out.append(c)
    return tuple(out)


def iter_assignments(predicates: tuple[Predicate, ...]) -> Iterator[Assignment]:
    """All complete assignments in canonical order.

    Declaration order is most significant; each domain iterates in its own
    declared order.
    """
    ids = [p.id for p in predicates]
    for combo in itertools.product(*(p.domain for p in predicates)):
        yield Assignment(dict(zip(ids, combo)))


def state_space_size(predicates: tuple[Predicate, ...]) -> int:
    size = 1
    for p in predicates:
        size *= len(p.domain)
    return size


def _check_cap(doc: Document, cap: int) -> int:
    size = state_space_size(doc.predicates)
    if size > cap:
        raise StateSpaceTooLarge(size, cap)
    return size


def analyze(doc: Document, cap: int = DEFAULT_STATE_CAP) -> AnalysisReport:
    """Audit a document by exhausting its complete assignment space.

    Records every conflicting norm set with its first witness (in canonical
    assignment order), norms that never win, and a greedily merged compact
    description of the unregulated regions. Deterministic.
    """
    size = _check_cap(doc, cap)
    norms, _warnings = extract_norms(doc)

    conflict_order: list[tuple[str, ...]] = []
    conflict_witness: dict[tuple[str, ...], Assignment] = {}
    winners: set[str] = set()
    unregulated: list[Assignment] = []

    for assignment in iter_assignments(doc.predicates):
        outcome = resolve(norms, assignment)
        if isinstance(outcome, Conflict):
            key = tuple(sorted(n.id for n in outcome.norms))
            if key not in conflict_witness:
                conflict_witness[key] = assignment
                conflict_order.append(key)
        elif isinstance(outcome, Decided):
            winners.update(n.id for n in outcome.winners)
        else:
            unregulated.append(assignment)

    shadowed = tuple(n.id for n in norms if n.id not in winners)

    builder = _Builder(doc)
    root = builder.build()
    stats = _stats_of(builder.nodes, root)

    return AnalysisReport(
        conflicts=tuple(
            ConflictFinding(norms=key, witness=conflict_witness[key])
            for key in conflict_order
        ),
        shadowed=shadowed,
        unregulated_regions=_merge_regions(unregulated, doc.predicates),
        stats=stats,
        assignments_checked=size,
    )


def _merge_regions(unregulated: list[Assignment],
                   predicates: tuple[Predicate, ...]) -> tuple[Assignment, ...]:
    """Greedily generalize unregulated assignments by dropping don't-cares.

    For each uncovered assignment in canonical order, try to drop each
    predicate in declaration order; a predicate can be dropped when every
    completion of the remaining partial assignment is also unregulated.
    """
    if not unregulated:
        return ()
    ordered = [tuple(a.facts[p.id] for p in predicates) for a in unregulated]
    pool = set(ordered)
    covered: set[tuple[Answer, ...]] = set()
    regions: list[Assignment] = []

    def completions(partial: dict[int, Answer]) -> Iterator[tuple[Answer, ...]]:
        axes = [
            (partial[i],) if i in partial else predicates[i].domain
            for i in range(len(predicates))
        ]
        return itertools.product(*axes)

    for key in ordered:
        if key in covered:
            continue
        partial = {i: v for i, v in enumerate(key)}
        for i in range(len(predicates)):
            trial = {j: v for j, v in partial.items() if j != i}
            if all(c in pool for c in completions(trial)):
                partial = trial
        for c in completions(partial):
            covered.add(c)
        regions.append(Assignment({
            predicates[i].id: partial[i] for i in sorted(partial)
        }))
    return tuple(regions)


def traverse(tree: CompiledTree, assignment: Assignment) -> int:
    """Index of the leaf a complete assignment reaches."""
    i = tree.root
    while True:
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            return i
        i = node.yes if assignment.value(node.predicate) == node.value else node.no


def equivalence_check(tree: CompiledTree, doc: Document,
                      cap: int = DEFAULT_STATE_CAP) -> Optional[Assignment]:
    """Compare the tree against brute-force resolution on every assignment.

    Returns None when every complete assignment agrees, otherwise the first
    counterexample in canonical order. Unregulated outcomes are expected to
    reach the default (or built-in) leaf.
    """
    _check_cap(doc, cap)
    norms, _warnings = extract_norms(doc)
    fallback = doc.default_consequence or UNREGULATED_ID
    for assignment in iter_assignments(doc.predicates):
        leaf = tree.nodes[traverse(tree, assignment)]
        outcome = resolve(norms, assignment)
        if isinstance(outcome, Decided):
            expected = outcome.consequence
        elif isinstance(outcome, Unregulated):
            expected = fallback
        else:
            return assignment  # a conflicting document can never match a tree
        if leaf.consequence != expected:
            return assignment
    return None
