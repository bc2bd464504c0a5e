"""Graphviz DOT export for authored documents and compiled trees.

Question nodes are boxes labeled with their prompts, category nodes are
ellipses, and outcome leaves are double-bordered boxes carrying the
consequence text. Edges carry the answer that selects them (`yes`/`no` on
compiled trees). Nodes are emitted in preorder, so output is deterministic.
"""

from __future__ import annotations

from typing import Union

from .compiler import CompiledTree, TestNode
from .model import (
    AskNode,
    CategoryNode,
    Document,
    Node,
    question_for,
)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _answer_label(value) -> str:
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def _document_lines(doc: Document) -> list[str]:
    lines: list[str] = []

    def emit(node: Node) -> None:
        name = node.id
        if isinstance(node, CategoryNode):
            lines.append(f"  {name} [label={_quote(node.label)}, shape=ellipse];")
            for child in node.children:
                lines.append(f"  {name} -> {child.id};")
                emit(child)
        elif isinstance(node, AskNode):
            prompt = doc.predicate(node.predicate).prompt
            lines.append(f"  {name} [label={_quote(prompt)}, shape=box];")
            for answer, child in node.branches:
                lines.append(
                    f"  {name} -> {child.id} [label={_quote(_answer_label(answer))}];")
                emit(child)
        else:
            text = doc.consequence(node.consequence).text
            lines.append(f"  {name} [label={_quote(text)}, shape=box, peripheries=2];")

    emit(doc.root)
    return lines


def _tree_lines(tree: CompiledTree) -> list[str]:
    lines: list[str] = []

    def emit(index: int) -> None:
        node = tree.nodes[index]
        name = f"b{index}"
        if isinstance(node, TestNode):
            label = question_for(tree.predicate(node.predicate), node.value)
            lines.append(f"  {name} [label={_quote(label)}, shape=box];")
            lines.append(f'  {name} -> b{node.yes} [label="yes"];')
            lines.append(f'  {name} -> b{node.no} [label="no"];')
            emit(node.yes)
            emit(node.no)
        else:
            text = tree.consequence(node.consequence).text
            lines.append(f"  {name} [label={_quote(text)}, shape=box, peripheries=2];")

    emit(tree.root)
    return lines


def export_dot(obj: Union[Document, CompiledTree]) -> str:
    """Render a Document or CompiledTree as a Graphviz digraph."""
    title = obj.title if isinstance(obj, Document) else obj.source_title
    body = _document_lines(obj) if isinstance(obj, Document) else _tree_lines(obj)
    head = [f"digraph {_quote(title)} {{", "  rankdir=TB;"]
    return "\n".join(head + body + ["}"]) + "\n"
