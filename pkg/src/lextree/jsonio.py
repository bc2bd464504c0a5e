"""JSON interchange for documents and compiled trees (`format_version: 1`).

The round trip ``import_json(export_json(x))`` is the identity: node ids and
declaration order are preserved verbatim, branch order is kept as stored.
Unknown fields are rejected so stale or foreign payloads fail loudly instead
of being silently reinterpreted. Export output is byte-identical across runs
for equal inputs.
"""

from __future__ import annotations

import json
from typing import Any, Optional, Union

from .compiler import BinNode, CompiledTree, Leaf, TestNode
from .errors import BadVersion, ParseError, SchemaViolation
from .model import (
    Answer,
    AskNode,
    CategoryKind,
    CategoryNode,
    Consequence,
    Document,
    LeafNode,
    Node,
    Predicate,
    UNREGULATED_ID,
    validate_document,
)

FORMAT_VERSION = 1

_KIND_NAMES = {k.value: k for k in CategoryKind}


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _predicate_dict(p: Predicate) -> dict:
    domain: dict[str, Any] = {"type": "bool"} if p.is_boolean else \
        {"type": "options", "values": list(p.options)}
    return {"id": p.id, "prompt": p.prompt, "domain": domain,
            "gate": p.gate, "rank": p.rank}


def _consequence_dict(c: Consequence) -> dict:
    return {"id": c.id, "text": c.text, "priority": c.priority}


def _node_dict(node: Node) -> dict:
    if isinstance(node, CategoryNode):
        return {
            "type": "category",
            "id": node.id,
            "kind": node.kind.value,
            "label": node.label,
            "children": [_node_dict(c) for c in node.children],
        }
    if isinstance(node, AskNode):
        return {
            "type": "ask",
            "id": node.id,
            "predicate": node.predicate,
            "branches": [{"answer": a, "node": _node_dict(c)} for a, c in node.branches],
        }
    return {"type": "leaf", "id": node.id, "consequence": node.consequence}


def document_to_dict(doc: Document) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "document",
        "title": doc.title,
        "default_consequence": doc.default_consequence,
        "predicates": [_predicate_dict(p) for p in doc.predicates],
        "consequences": [_consequence_dict(c) for c in doc.consequences],
        "root": _node_dict(doc.root),
    }


def _bin_node_dict(node: BinNode) -> dict:
    if isinstance(node, TestNode):
        return {"type": "test", "predicate": node.predicate, "value": node.value,
                "yes": node.yes, "no": node.no}
    return {"type": "leaf", "consequence": node.consequence,
            "winning_norm": node.winning_norm}


def tree_to_dict(tree: CompiledTree) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "compiled_tree",
        "source_title": tree.source_title,
        "predicates": [_predicate_dict(p) for p in tree.predicates],
        "consequences": [_consequence_dict(c) for c in tree.consequences],
        "root": tree.root,
        "nodes": [_bin_node_dict(n) for n in tree.nodes],
    }


def export_json(obj: Union[Document, CompiledTree]) -> bytes:
    """Serialize a Document or CompiledTree to canonical JSON bytes."""
    payload = document_to_dict(obj) if isinstance(obj, Document) else tree_to_dict(obj)
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Import
# ---------------------------------------------------------------------------

class _Reader:
    """Strict walker over decoded JSON: typed fields, no extras."""

    def __init__(self, value: Any, path: str = "$"):
        self.value = value
        self.path = path

    def fail(self, message: str):
        raise SchemaViolation(message, self.path)

    def obj(self, *fields: str) -> dict:
        if not isinstance(self.value, dict):
            self.fail("expected an object")
        extra = set(self.value) - set(fields)
        if extra:
            self.fail(f"unknown field(s): {', '.join(sorted(extra))}")
        missing = set(fields) - set(self.value)
        if missing:
            self.fail(f"missing field(s): {', '.join(sorted(missing))}")
        return self.value

    def at(self, key: str) -> "_Reader":
        return _Reader(self.value[key], f"{self.path}.{key}")

    def items(self) -> list["_Reader"]:
        if not isinstance(self.value, list):
            self.fail("expected an array")
        return [_Reader(v, f"{self.path}[{i}]") for i, v in enumerate(self.value)]

    def str_(self) -> str:
        if not isinstance(self.value, str):
            self.fail("expected a string")
        return self.value

    def opt_str(self) -> Optional[str]:
        if self.value is None:
            return None
        return self.str_()

    def int_(self) -> int:
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            self.fail("expected an integer")
        return self.value

    def bool_(self) -> bool:
        if not isinstance(self.value, bool):
            self.fail("expected a boolean")
        return self.value

    def answer(self) -> Answer:
        if isinstance(self.value, bool) or isinstance(self.value, str):
            return self.value
        self.fail("expected true, false, or a string answer")


def _read_predicate(r: _Reader) -> Predicate:
    r.obj("id", "prompt", "domain", "gate", "rank")
    dom = r.at("domain")
    if not isinstance(dom.value, dict):
        dom.fail("expected an object")
    options: Optional[tuple[str, ...]] = None
    if dom.value.get("type") == "bool":
        dom.obj("type")
    elif dom.value.get("type") == "options":
        dom.obj("type", "values")
        options = tuple(v.str_() for v in dom.at("values").items())
    else:
        dom.fail("domain type must be 'bool' or 'options'")
    try:
        return Predicate(id=r.at("id").str_(), prompt=r.at("prompt").str_(),
                         options=options, gate=r.at("gate").bool_(),
                         rank=r.at("rank").int_())
    except ValueError as exc:
        r.fail(str(exc))


def _read_consequence(r: _Reader) -> Consequence:
    r.obj("id", "text", "priority")
    try:
        return Consequence(id=r.at("id").str_(), text=r.at("text").str_(),
                           priority=r.at("priority").int_())
    except ValueError as exc:
        r.fail(str(exc))


def _read_node(r: _Reader) -> Node:
    if not isinstance(r.value, dict) or "type" not in r.value:
        r.fail("expected a node object with a 'type' field")
    ntype = r.at("type").str_()
    try:
        if ntype == "category":
            r.obj("type", "id", "kind", "label", "children")
            kind_name = r.at("kind").str_()
            if kind_name not in _KIND_NAMES:
                r.at("kind").fail(f"unknown category kind '{kind_name}'")
            return CategoryNode(
                id=r.at("id").str_(),
                kind=_KIND_NAMES[kind_name],
                label=r.at("label").str_(),
                children=tuple(_read_node(c) for c in r.at("children").items()),
            )
        if ntype == "ask":
            r.obj("type", "id", "predicate", "branches")
            branches = []
            for br in r.at("branches").items():
                br.obj("answer", "node")
                branches.append((br.at("answer").answer(), _read_node(br.at("node"))))
            return AskNode(id=r.at("id").str_(), predicate=r.at("predicate").str_(),
                           branches=tuple(branches))
        if ntype == "leaf":
            r.obj("type", "id", "consequence")
            return LeafNode(id=r.at("id").str_(), consequence=r.at("consequence").str_())
    except ValueError as exc:
        r.fail(str(exc))
    r.at("type").fail(f"unknown node type '{ntype}'")


def _read_document(r: _Reader) -> Document:
    r.obj("format_version", "kind", "title", "default_consequence",
          "predicates", "consequences", "root")
    doc = Document(
        title=r.at("title").str_(),
        predicates=tuple(_read_predicate(p) for p in r.at("predicates").items()),
        consequences=tuple(_read_consequence(c) for c in r.at("consequences").items()),
        root=_read_node(r.at("root")),
        default_consequence=r.at("default_consequence").opt_str(),
    )
    diagnostics = validate_document(doc)
    if diagnostics:
        raise ParseError(diagnostics)
    return doc


def _read_bin_node(r: _Reader, count: int) -> BinNode:
    if not isinstance(r.value, dict) or "type" not in r.value:
        r.fail("expected a node object with a 'type' field")
    ntype = r.at("type").str_()
    if ntype == "test":
        r.obj("type", "predicate", "value", "yes", "no")
        yes, no = r.at("yes").int_(), r.at("no").int_()
        if not (0 <= yes < count and 0 <= no < count):
            r.fail("child index out of range")
        return TestNode(predicate=r.at("predicate").str_(),
                        value=r.at("value").answer(), yes=yes, no=no)
    if ntype == "leaf":
        r.obj("type", "consequence", "winning_norm")
        return Leaf(consequence=r.at("consequence").str_(),
                    winning_norm=r.at("winning_norm").opt_str())
    r.at("type").fail(f"unknown node type '{ntype}'")


def _read_tree(r: _Reader) -> CompiledTree:
    r.obj("format_version", "kind", "source_title", "predicates",
          "consequences", "root", "nodes")
    node_items = r.at("nodes").items()
    nodes = tuple(_read_bin_node(n, len(node_items)) for n in node_items)
    root = r.at("root").int_()
    if not (0 <= root < len(nodes)):
        r.at("root").fail("root index out of range")
    tree = CompiledTree(
        source_title=r.at("source_title").str_(),
        predicates=tuple(_read_predicate(p) for p in r.at("predicates").items()),
        consequences=tuple(_read_consequence(c) for c in r.at("consequences").items()),
        nodes=nodes,
        root=root,
    )
    _check_tree_shape(tree, r)
    return tree


def _check_tree_shape(tree: CompiledTree, r: _Reader) -> None:
    predicates = {p.id: p for p in tree.predicates}
    known = {c.id for c in tree.consequences} | {UNREGULATED_ID}
    seen: set[int] = set()
    stack = [tree.root]
    while stack:
        i = stack.pop()
        if i in seen:
            r.at("nodes").fail("compiled tree shares a node; must be a strict tree")
        seen.add(i)
        node = tree.nodes[i]
        if isinstance(node, TestNode):
            pred = predicates.get(node.predicate)
            if pred is None:
                r.at("nodes").fail(f"test references unknown predicate '{node.predicate}'")
            if node.value not in pred.domain:
                r.at("nodes").fail(
                    f"test value {node.value!r} is not in the domain of '{node.predicate}'")
            stack.extend((node.yes, node.no))
        else:
            if node.consequence not in known:
                r.at("nodes").fail(
                    f"leaf references unknown consequence '{node.consequence}'")
    if len(seen) != len(tree.nodes):
        r.at("nodes").fail("compiled tree has unreachable nodes")


def import_json(data: Union[bytes, str]) -> Union[Document, CompiledTree]:
    """Parse interchange JSON back into a Document or CompiledTree.

    Raises BadVersion for a wrong format_version, SchemaViolation for
    structural problems, and ParseError (with diagnostics) when a document
    payload breaks semantic invariants.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        decoded = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not valid JSON: {exc}") from exc
    r = _Reader(decoded)
    if not isinstance(decoded, dict):
        r.fail("expected a top-level object")
    version = decoded.get("format_version")
    if version != FORMAT_VERSION:
        raise BadVersion(version)
    kind = decoded.get("kind")
    if kind == "document":
        return _read_document(r)
    if kind == "compiled_tree":
        return _read_tree(r)
    raise SchemaViolation("kind must be 'document' or 'compiled_tree'", "$.kind")
