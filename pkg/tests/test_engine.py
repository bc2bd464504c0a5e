import random

import pytest
from hypothesis import given, settings, strategies as st

from lextree.compiler import CompiledTree, Leaf, TestNode, compile_document, iter_assignments
from lextree.dsl import parse
from lextree.engine import (
    AwaitingAnswer,
    Done,
    drive,
    evaluate,
    start,
)
from lextree.errors import (
    ConflictDetected,
    InvalidFactValue,
    MissingFact,
    NothingToUndo,
    SessionFinished,
    UnknownPredicate,
)
from lextree.model import (
    Assignment,
    Conflict,
    Decided,
    Unregulated,
    extract_norms,
    resolve,
)

from docgen import documents


class TestEvaluate:
    def test_not_natural_person_short_circuits(self, vietnam_tree):
        trace = evaluate(vietnam_tree, {"natural_person": False})
        assert trace.consequence == "no_will_right"
        assert trace.text == "No right to make a will"
        assert len(trace.steps) == 1
        assert trace.steps[0].answer == "no"

    def test_single_leaf_tree_needs_no_facts(self):
        tree = compile_document(parse('tree "t"\nconsequence c "C"\nleaf c'))
        trace = evaluate(tree, {})
        assert trace.steps == ()
        assert trace.consequence == "c"

    def test_agrees_with_resolution_on_every_assignment(self, vietnam_doc, vietnam_tree):
        norms, _ = extract_norms(vietnam_doc)
        for assignment in iter_assignments(vietnam_doc.predicates):
            trace = evaluate(vietnam_tree, assignment.facts)
            oracle = resolve(norms, assignment)
            assert isinstance(oracle, Decided)
            assert trace.consequence == oracle.consequence

    def test_off_path_facts_are_ignored(self, vietnam_tree):
        trace = evaluate(vietnam_tree, {"natural_person": False, "age_bracket": "over_18"})
        assert len(trace.steps) == 1

    def test_missing_fact_names_first_unanswered_on_path(self, vietnam_tree):
        with pytest.raises(MissingFact) as err:
            evaluate(vietnam_tree, {"natural_person": True})
        assert err.value.predicate == "age_bracket"
        with pytest.raises(MissingFact) as err:
            evaluate(vietnam_tree, {})
        assert err.value.predicate == "natural_person"

    def test_unknown_fact_strict_vs_lenient(self, vietnam_tree):
        facts = {"natural_person": False, "natural_persom": True}
        with pytest.raises(UnknownPredicate):
            evaluate(vietnam_tree, facts)
        trace = evaluate(vietnam_tree, facts, strict=False)
        assert trace.consequence == "no_will_right"

    def test_out_of_domain_value_rejected(self, vietnam_tree):
        with pytest.raises(InvalidFactValue):
            evaluate(vietnam_tree, {"natural_person": True, "age_bracket": "elderly"})
        with pytest.raises(InvalidFactValue):
            evaluate(vietnam_tree, {"natural_person": "yes"})

    def test_builtin_unregulated_leaf_has_readable_text(self, vietnam_tree):
        gap_tree = CompiledTree(
            source_title="gap",
            predicates=vietnam_tree.predicates,
            consequences=vietnam_tree.consequences,
            nodes=(Leaf(consequence="UNREGULATED"),),
            root=0,
        )
        trace = evaluate(gap_tree, {})
        assert trace.consequence == "UNREGULATED"
        assert trace.text == "No applicable rule"


class TestSession:
    def test_start_asks_the_gate_first(self, vietnam_tree):
        status = start(vietnam_tree).status
        assert isinstance(status, AwaitingAnswer)
        assert status.prompt == "Is the testator a natural person?"
        assert status.literal.predicate == "natural_person"

    def test_answering_no_finishes_immediately(self, vietnam_tree):
        session = start(vietnam_tree).answer("no")
        status = session.status
        assert isinstance(status, Done)
        assert status.consequence == "no_will_right"
        assert len(status.trace.steps) == 1

    def test_full_walk_to_full_capacity(self, vietnam_tree):
        session = start(vietnam_tree).answer("yes").answer("no").answer("no")
        status = session.status
        assert isinstance(status, Done)
        assert status.consequence == "will_full_capacity"

    def test_answer_then_undo_restores_state(self, vietnam_tree):
        session = start(vietnam_tree)
        assert session.answer("yes").undo() == session
        deeper = session.answer("yes")
        assert deeper.answer("no").undo() == deeper

    def test_undo_on_fresh_session_raises(self, vietnam_tree):
        with pytest.raises(NothingToUndo):
            start(vietnam_tree).undo()

    def test_answer_after_done_raises(self, vietnam_tree):
        finished = start(vietnam_tree).answer("no")
        with pytest.raises(SessionFinished):
            finished.answer("yes")
        with pytest.raises(SessionFinished):
            finished.what_if("yes")

    def test_bad_reply_rejected(self, vietnam_tree):
        with pytest.raises(ValueError):
            start(vietnam_tree).answer("maybe")

    def test_what_if_does_not_change_state(self, vietnam_tree):
        session = start(vietnam_tree)
        before = session
        session.what_if("yes")
        session.what_if("no")
        assert session == before
        assert session.answered == ()

    def test_what_if_previews_differ_at_the_root(self, vietnam_tree):
        session = start(vietnam_tree)
        yes_preview = session.what_if("yes")
        no_preview = session.what_if("no")
        assert yes_preview.kind == "question"
        assert no_preview.kind == "outcome"
        assert no_preview.text == "No right to make a will"

    def test_trace_replay_reaches_the_outcome(self, vietnam_tree):
        session = start(vietnam_tree).answer("yes").answer("no").answer("yes")
        status = session.status
        assert isinstance(status, Done)
        cursor = vietnam_tree.root
        for step in status.trace.steps:
            node = vietnam_tree.nodes[cursor]
            assert isinstance(node, TestNode)
            assert (node.predicate, node.value) == (step.literal.predicate, step.literal.value)
            cursor = node.yes if step.answer == "yes" else node.no
        leaf = vietnam_tree.nodes[cursor]
        assert isinstance(leaf, Leaf)
        assert leaf.consequence == status.consequence

    def test_session_depth_within_compiled_depth(self, vietnam_doc, vietnam_tree):
        depth = vietnam_tree.stats().depth
        for assignment in iter_assignments(vietnam_doc.predicates):
            finished = drive(vietnam_tree, assignment.facts)
            assert len(finished.answered) <= depth

    def test_driving_matches_evaluate_everywhere(self, vietnam_doc, vietnam_tree):
        for assignment in iter_assignments(vietnam_doc.predicates):
            ev = evaluate(vietnam_tree, assignment.facts)
            dr = drive(vietnam_tree, assignment.facts)
            status = dr.status
            assert isinstance(status, Done)
            assert status.consequence == ev.consequence
            assert [s.answer for s in status.trace.steps] == [s.answer for s in ev.steps]


# -- randomized properties -----------------------------------------------------

@settings(max_examples=40)
@given(documents, st.integers(0, 2**31 - 1))
def test_random_walks_undo_and_agree(doc, seed):
    try:
        tree = compile_document(doc)
    except ConflictDetected:
        return
    rng = random.Random(seed)
    norms, _ = extract_norms(doc)
    question_bound = sum(len(p.domain) - 1 for p in doc.predicates)

    session = start(tree)
    taken = []
    while True:
        status = session.status
        if isinstance(status, Done):
            break
        reply = rng.choice(("yes", "no"))
        nxt = session.answer(reply)
        assert nxt.undo() == session
        session = nxt
        taken.append((status.literal, reply))
    assert len(taken) <= question_bound

    # any complete assignment consistent with the walk resolves to the outcome
    facts = {}
    for literal, reply in taken:
        if reply == "yes":
            facts[literal.predicate] = literal.value
    for p in doc.predicates:
        if p.id not in facts:
            refused = {lit.value for lit, reply in taken
                       if reply == "no" and lit.predicate == p.id}
            candidates = [v for v in p.domain if v not in refused]
            assert candidates, "a cascade never refuses every domain value"
            facts[p.id] = candidates[0]
    outcome = resolve(norms, Assignment(facts))
    done = session.status
    assert not isinstance(outcome, Conflict)
    if isinstance(outcome, Decided):
        assert done.consequence == outcome.consequence
    else:
        assert isinstance(outcome, Unregulated)
        assert done.consequence == (doc.default_consequence or "UNREGULATED")
