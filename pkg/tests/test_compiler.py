import pytest
from hypothesis import given, settings

from lextree.compiler import (
    Leaf,
    TestNode,
    analyze,
    compile_document,
    equivalence_check,
    iter_assignments,
    traverse,
)
from lextree.dsl import parse
from lextree.errors import ConflictDetected, StateSpaceTooLarge
from lextree.jsonio import export_json
from lextree.model import (
    Assignment,
    Conflict,
    Decided,
    Document,
    Predicate,
    UNREGULATED_ID,
    extract_norms,
    resolve,
)

from conftest import fixture_text
from docgen import documents


def make_doc(text: str) -> Document:
    return parse(text)


MINIMAL_SPLIT = """
tree "split"
predicate q "Q?" bool
consequence a "A"
consequence b "B"
category "r" {
  ask q { yes -> leaf a
          no -> leaf b }
}
"""

ONE_CONFLICT = """
tree "one conflict"
predicate a "A?" bool
predicate b "B?" bool
consequence x "X"
consequence y "Y"
consequence w "W" priority 0
category "r" {
  ask a { yes -> leaf x
          no -> leaf w }
  ask b { yes -> leaf y
          no -> leaf w }
}
"""

# The refinement re-asks b, so its contradictory no-branch path is dropped:
# the norm set carries {a} -> x and the strictly more specific {a, b} -> x
# without a {a, b=no} twin that would eclipse the general rule.
BENIGN_SPECIALIZATION = """
tree "benign"
predicate a "A?" bool
predicate b "B?" bool
consequence x "X"
category "r" {
  ask a { yes -> leaf x
          no -> leaf x }
  ask b { yes -> ask a { yes -> ask b { yes -> leaf x
                                        no -> leaf x }
                         no -> leaf x }
          no -> leaf x }
}
"""


class TestCompile:
    def test_minimal_boolean_split(self):
        tree = compile_document(make_doc(MINIMAL_SPLIT))
        root = tree.nodes[tree.root]
        assert isinstance(root, TestNode)
        assert (root.predicate, root.value) == ("q", True)
        assert isinstance(tree.nodes[root.yes], Leaf)
        assert tree.nodes[root.yes].consequence == "a"
        assert tree.nodes[root.no].consequence == "b"
        assert tree.stats().depth == 1

    def test_vietnam_root_is_the_gate(self, vietnam_tree):
        root = vietnam_tree.nodes[vietnam_tree.root]
        assert isinstance(root, TestNode)
        assert root.predicate == "natural_person"
        no_branch = vietnam_tree.nodes[root.no]
        assert isinstance(no_branch, Leaf)
        assert no_branch.consequence == "no_will_right"

    def test_age_cascade_produces_three_distinct_leaves(self, vietnam_doc, vietnam_tree):
        root = vietnam_tree.nodes[vietnam_tree.root]
        reachable_leaves = []
        stack = [root.yes]
        while stack:
            node = vietnam_tree.nodes[stack.pop()]
            if isinstance(node, Leaf):
                reachable_leaves.append(node.consequence)
            else:
                stack.extend((node.yes, node.no))
        assert len(reachable_leaves) == 3
        assert len(set(reachable_leaves)) == 3
        # confirmed independently: enumerate every complete assignment with
        # the gate answered yes and collect outcomes through brute force
        norms, _ = extract_norms(vietnam_doc)
        outcomes = set()
        for assignment in iter_assignments(vietnam_doc.predicates):
            if assignment.value("natural_person") is True:
                outcome = resolve(norms, assignment)
                assert isinstance(outcome, Decided)
                outcomes.add(outcome.consequence)
        assert outcomes == set(reachable_leaves)

    def test_vietnam_stats(self, vietnam_tree):
        stats = vietnam_tree.stats()
        assert (stats.internal, stats.leaves, stats.depth) == (3, 4, 3)
        assert len(vietnam_tree.nodes) == 2 * stats.leaves - 1

    def test_compile_is_deterministic_bytes(self):
        text = fixture_text("china.lex")
        first = export_json(compile_document(parse(text)))
        second = export_json(compile_document(parse(text)))
        assert first == second

    def test_conflicting_fixture_refuses_with_witness(self, conflicting_doc):
        with pytest.raises(ConflictDetected) as err:
            compile_document(conflicting_doc)
        report = err.value.report
        assert len(report.conflicts) >= 1
        norms, _ = extract_norms(conflicting_doc)
        for finding in report.conflicts:
            outcome = resolve(norms, finding.witness)
            assert isinstance(outcome, Conflict)
            assert tuple(sorted(n.id for n in outcome.norms)) == finding.norms

    def test_declared_default_consequence_works_as_a_leaf(self):
        text = ('tree "gap"\ndefault consequence none "Nothing applies"\n'
                'predicate a "A?" bool\npredicate b "B?" bool\n'
                'consequence x "X"\n'
                'category "r" {\n'
                "  ask a { yes -> ask b { yes -> leaf x\n no -> leaf x }\n"
                "          no -> ask b { yes -> leaf x\n no -> leaf none } }\n"
                "}")
        doc = parse(text)
        tree = compile_document(doc)
        leaf_ids = {n.consequence for n in tree.nodes if isinstance(n, Leaf)}
        assert "none" in leaf_ids
        assert UNREGULATED_ID not in leaf_ids
        assert equivalence_check(tree, doc) is None

    def test_dropped_paths_do_not_break_coverage(self):
        # the inner re-ask of a creates a contradictory (dropped) path; the
        # remaining norms still cover every assignment
        text = ('tree "drop"\npredicate a "A?" bool\nconsequence x "X"\n'
                'consequence y "Y"\n'
                "ask a { yes -> ask a { yes -> leaf x\n no -> leaf y }\n"
                "        no -> leaf y }")
        doc = parse(text)
        tree = compile_document(doc)
        assert equivalence_check(tree, doc) is None
        assert analyze(doc).unregulated_regions == ()


class TestAnalyze:
    def test_two_overlapping_norms_yield_exactly_one_conflict(self):
        doc = make_doc(ONE_CONFLICT)
        report = analyze(doc)
        assert len(report.conflicts) == 1
        finding = report.conflicts[0]
        assert finding.witness.facts == {"a": True, "b": True}
        norms, _ = extract_norms(doc)
        assert isinstance(resolve(norms, finding.witness), Conflict)

    def test_specialization_with_same_outcome_is_benign(self):
        doc = make_doc(BENIGN_SPECIALIZATION)
        norms, _ = extract_norms(doc)
        assert any(
            m.condition < n.condition and m.consequence == n.consequence
            for m in norms for n in norms
        )
        report = analyze(doc)
        assert report.conflicts == ()
        assert report.shadowed == ()

    def test_full_coverage_leaves_no_unregulated_regions(self, vietnam_doc):
        assert analyze(vietnam_doc).unregulated_regions == ()

    def test_region_merging_drops_dont_care_predicates(self):
        # White box: exhaustive branches make authored documents complete
        # covers, so uncovered regions only arise from hand-built norm sets.
        from lextree.compiler import _merge_regions

        preds = (Predicate("a", "A?"), Predicate("b", "B?"),
                 Predicate("c", "C?", options=("u", "v", "w")))
        ordered = [Assignment({"a": True, "b": True, "c": "w"})]
        for b in (True, False):
            for c in ("u", "v", "w"):
                ordered.append(Assignment({"a": False, "b": b, "c": c}))
        regions = _merge_regions(ordered, preds)
        # first uncovered point generalizes over a, the rest collapse to a=no
        assert [r.facts for r in regions] == [{"b": True, "c": "w"}, {"a": False}]
        assert _merge_regions([], preds) == ()

    def test_eclipsed_general_rule_is_shadowed(self, lex_specialis_doc):
        report = analyze(lex_specialis_doc)
        norms, _ = extract_norms(lex_specialis_doc)
        # the general rule authored in the first subtree can never win: on
        # overlapping facts the particular rule beats it, elsewhere its
        # refined twin from the second subtree does
        first_general = next(
            n.id for n in norms
            if n.consequence == "general_outcome" and len(n.condition) == 1)
        assert report.shadowed == (first_general,)

    def test_state_space_cap_enforced(self):
        decls = "\n".join(f'predicate p{i} "P{i}?" bool' for i in range(21))
        doc = parse(f'tree "big"\n{decls}\nconsequence c "C"\nleaf c')
        with pytest.raises(StateSpaceTooLarge) as err:
            analyze(doc)
        assert err.value.count == 2 ** 21
        assert err.value.cap == 10 ** 6
        with pytest.raises(StateSpaceTooLarge):
            equivalence_check(compile_document(doc), doc)

    def test_custom_cap_applies(self, vietnam_doc):
        with pytest.raises(StateSpaceTooLarge):
            analyze(vietnam_doc, cap=5)  # the fixture space is 6
        assert analyze(vietnam_doc, cap=6).assignments_checked == 6

    def test_report_json_shape_is_stable(self):
        report = analyze(make_doc(ONE_CONFLICT))
        payload = report.to_json_dict()
        assert payload["format_version"] == 1
        assert payload["conflicts"][0]["witness"] == {"a": True, "b": True}
        assert set(payload) == {
            "format_version", "conflicts", "shadowed", "unregulated_regions",
            "stats", "assignments_checked",
        }


class TestEquivalence:
    def test_vietnam_tree_matches_oracle(self, vietnam_doc, vietnam_tree):
        assert equivalence_check(vietnam_tree, vietnam_doc) is None

    def test_single_leaf_matches_empty_condition_norm(self):
        doc = parse('tree "t"\nconsequence c "C"\nleaf c')
        tree = compile_document(doc)
        assert len(tree.nodes) == 1
        assert equivalence_check(tree, doc) is None

    def test_swapped_branches_are_caught(self, vietnam_doc, vietnam_tree):
        root = vietnam_tree.nodes[vietnam_tree.root]
        mutated_nodes = list(vietnam_tree.nodes)
        mutated_nodes[vietnam_tree.root] = TestNode(
            predicate=root.predicate, value=root.value, yes=root.no, no=root.yes)
        mutated = type(vietnam_tree)(
            source_title=vietnam_tree.source_title,
            predicates=vietnam_tree.predicates,
            consequences=vietnam_tree.consequences,
            nodes=tuple(mutated_nodes),
            root=vietnam_tree.root,
        )
        counterexample = equivalence_check(mutated, vietnam_doc)
        assert counterexample is not None
        trace_leaf = mutated.nodes[traverse(mutated, counterexample)]
        norms, _ = extract_norms(vietnam_doc)
        oracle = resolve(norms, counterexample)
        assert isinstance(oracle, Decided)
        assert trace_leaf.consequence != oracle.consequence


# -- structural properties ----------------------------------------------------

def _paths(tree):
    def walk(i, prefix):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            yield prefix
            return
        literal = (node.predicate, node.value)
        yield from walk(node.yes, prefix + (literal,))
        yield from walk(node.no, prefix + (literal,))

    yield from walk(tree.root, ())


@settings(max_examples=60)
@given(documents)
def test_binary_shape_and_oracle_equivalence(doc):
    try:
        tree = compile_document(doc)
    except ConflictDetected as err:
        norms, _ = extract_norms(doc)
        for finding in err.report.conflicts:
            assert isinstance(resolve(norms, finding.witness), Conflict)
        return
    stats = tree.stats()
    assert len(tree.nodes) == 2 * stats.leaves - 1
    assert equivalence_check(tree, doc) is None


@settings(max_examples=60)
@given(documents)
def test_gates_precede_content_checks_on_every_path(doc):
    try:
        tree = compile_document(doc)
    except ConflictDetected:
        return
    gates = {p.id for p in doc.predicates if p.gate}
    for path in _paths(tree):
        seen_non_gate = False
        first_seen: set[str] = set()
        for predicate, _value in path:
            if predicate in first_seen:
                continue
            first_seen.add(predicate)
            if predicate in gates:
                assert not seen_non_gate, (doc.title, path)
            else:
                seen_non_gate = True


@settings(max_examples=60)
@given(documents)
def test_no_literal_repeats_and_depth_is_bounded(doc):
    try:
        tree = compile_document(doc)
    except ConflictDetected:
        return
    bound = sum(len(p.domain) - 1 for p in doc.predicates)
    for path in _paths(tree):
        assert len(path) == len(set(path)), "a literal was tested twice on one path"
        assert len(path) <= bound
