"""Evaluate compiled trees against fact sets and drive consultations.

Evaluation is a single deterministic root-to-leaf walk. Consultations are
the same walk taken one question at a time: sessions are immutable values,
so undo and what-if previews are trivially correct and any stale state
remains valid.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, replace
from typing import Mapping, Optional, Union

from .compiler import CompiledTree, Leaf, TestNode
from .errors import (
    InvalidFactValue,
    MissingFact,
    NothingToUndo,
    SessionFinished,
    UnknownPredicate,
)
from .model import Answer, Assignment, Literal, question_for


@dataclass(frozen=True)
class TraceStep:
    prompt: str
    literal: Literal
    answer: str  # "yes" or "no"

    def to_json_dict(self) -> dict:
        return {
            "prompt": self.prompt,
            "predicate": self.literal.predicate,
            "value": self.literal.value,
            "answer": self.answer,
        }


@dataclass(frozen=True)
class Trace:
    """The full path of one evaluation: questions asked and the outcome."""

    steps: tuple[TraceStep, ...]
    consequence: str
    text: str
    winning_norm: Optional[str] = None

    def to_json_dict(self) -> dict:
        return {
            "steps": [s.to_json_dict() for s in self.steps],
            "outcome": {"consequence": self.consequence, "text": self.text},
            "winning_norm": self.winning_norm,
        }


def _literal_of(tree: CompiledTree, node: TestNode) -> Literal:
    return Literal(predicate=node.predicate, value=node.value)


def _question(tree: CompiledTree, node: TestNode) -> str:
    return question_for(tree.predicate(node.predicate), node.value)


def validate_facts(tree: CompiledTree, facts: Mapping[str, Answer],
                   strict: bool = True) -> Assignment:
    """Check fact keys and values against the tree's predicate table.

    Strict mode rejects unknown predicate names (a typo in a fact key is a
    safety hazard, so strict is the default); lenient mode drops them.
    Values outside a known predicate's domain are rejected in both modes.
    """
    known = {p.id: p for p in tree.predicates}
    checked: dict[str, Answer] = {}
    for key, value in facts.items():
        pred = known.get(key)
        if pred is None:
            if strict:
                raise UnknownPredicate(key)
            continue
        if value not in pred.domain:
            raise InvalidFactValue(key, value)
        checked[key] = value
    return Assignment(checked)


def evaluate(tree: CompiledTree, facts: Mapping[str, Answer],
             strict: bool = True) -> Trace:
    """Walk the tree under the given facts and return the full trace.

    Facts for predicates off the traversal path are ignored; the first
    on-path predicate without a fact raises MissingFact.
    """
    assignment = validate_facts(tree, facts, strict=strict)
    steps: list[TraceStep] = []
    i = tree.root
    while True:
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            outcome = tree.consequence(node.consequence)
            return Trace(
                steps=tuple(steps),
                consequence=outcome.id,
                text=outcome.text,
                winning_norm=node.winning_norm,
            )
        if not assignment.has(node.predicate):
            raise MissingFact(node.predicate)
        hit = assignment.value(node.predicate) == node.value
        steps.append(TraceStep(
            prompt=_question(tree, node),
            literal=_literal_of(tree, node),
            answer="yes" if hit else "no",
        ))
        i = node.yes if hit else node.no


@dataclass(frozen=True)
class AwaitingAnswer:
    """Session status: the cursor sits on a test awaiting yes or no."""

    prompt: str
    literal: Literal


@dataclass(frozen=True)
class Done:
    """Session status: the cursor reached a leaf."""

    consequence: str
    text: str
    trace: Trace


@dataclass(frozen=True)
class Preview:
    """Where one hypothetical reply would lead, without taking it."""

    kind: str  # "question" or "outcome"
    prompt: Optional[str] = None
    consequence: Optional[str] = None
    text: Optional[str] = None

    def to_json_dict(self) -> dict:
        if self.kind == "question":
            return {"kind": "question", "prompt": self.prompt}
        return {"kind": "outcome", "consequence": self.consequence, "text": self.text}


@dataclass(frozen=True)
class AnsweredStep:
    """One taken step: the literal asked, the node it was asked at, the reply."""

    literal: Literal
    node: int
    reply: str


@dataclass(frozen=True)
class ConsultationSession:
    """Resumable traversal state. Every operation returns a new session."""

    session_id: str
    tree: CompiledTree
    cursor: int
    answered: tuple[AnsweredStep, ...] = ()

    @property
    def finished(self) -> bool:
        return isinstance(self.tree.nodes[self.cursor], Leaf)

    @property
    def status(self) -> Union[AwaitingAnswer, Done]:
        node = self.tree.nodes[self.cursor]
        if isinstance(node, TestNode):
            return AwaitingAnswer(prompt=_question(self.tree, node),
                                  literal=_literal_of(self.tree, node))
        outcome = self.tree.consequence(node.consequence)
        return Done(consequence=outcome.id, text=outcome.text, trace=self.trace())

    def trace(self) -> Trace:
        steps = tuple(
            TraceStep(
                prompt=question_for(self.tree.predicate(s.literal.predicate), s.literal.value),
                literal=s.literal,
                answer=s.reply,
            )
            for s in self.answered
        )
        node = self.tree.nodes[self.cursor]
        if isinstance(node, Leaf):
            outcome = self.tree.consequence(node.consequence)
            return Trace(steps=steps, consequence=outcome.id, text=outcome.text,
                         winning_norm=node.winning_norm)
        return Trace(steps=steps, consequence="", text="", winning_norm=None)

    def answer(self, reply: str) -> "ConsultationSession":
        node = self.tree.nodes[self.cursor]
        if isinstance(node, Leaf):
            raise SessionFinished("the consultation already reached an outcome")
        step = AnsweredStep(literal=_literal_of(self.tree, node),
                            node=self.cursor, reply=_check_reply(reply))
        target = node.yes if step.reply == "yes" else node.no
        return replace(self, cursor=target, answered=self.answered + (step,))

    def undo(self) -> "ConsultationSession":
        if not self.answered:
            raise NothingToUndo("no answered steps to undo")
        return replace(self, cursor=self.answered[-1].node, answered=self.answered[:-1])

    def what_if(self, reply: str) -> Preview:
        node = self.tree.nodes[self.cursor]
        if isinstance(node, Leaf):
            raise SessionFinished("the consultation already reached an outcome")
        target = self.tree.nodes[node.yes if _check_reply(reply) == "yes" else node.no]
        if isinstance(target, TestNode):
            return Preview(kind="question", prompt=_question(self.tree, target))
        outcome = self.tree.consequence(target.consequence)
        return Preview(kind="outcome", consequence=outcome.id, text=outcome.text)


def _check_reply(reply: str) -> str:
    if reply not in ("yes", "no"):
        raise ValueError(f"reply must be 'yes' or 'no', got {reply!r}")
    return reply


def start(tree: CompiledTree, session_id: Optional[str] = None) -> ConsultationSession:
    """Open a consultation at the root of the tree."""
    return ConsultationSession(
        session_id=session_id or uuid.uuid4().hex,
        tree=tree,
        cursor=tree.root,
    )


def drive(tree: CompiledTree, facts: Mapping[str, Answer]) -> ConsultationSession:
    """Answer every question from a fact set until the session finishes."""
    assignment = validate_facts(tree, facts)
    session = start(tree)
    while not session.finished:
        status = session.status
        assert isinstance(status, AwaitingAnswer)
        literal = status.literal
        if not assignment.has(literal.predicate):
            raise MissingFact(literal.predicate)
        hit = assignment.value(literal.predicate) == literal.value
        session = session.answer("yes" if hit else "no")
    return session
