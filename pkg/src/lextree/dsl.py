"""The `.lex` authoring format: parser and canonical serializer.

Grammar (terminals quoted):

    document := 'tree' STRING default? decl* node
    default  := 'default' 'consequence' IDENT STRING
    decl     := 'predicate' IDENT STRING domain tag*
              | 'consequence' IDENT STRING ('priority' INT)?
    domain   := 'bool' | 'options' '[' IDENT (',' IDENT)* ']'
    tag      := 'gate' | 'rank' INT
    node     := 'category' CATKIND? STRING '{' node+ '}'
              | 'ask' IDENT '{' branch+ '}'
              | 'leaf' IDENT
    branch   := answer '->' node
    answer   := 'yes' | 'no' | IDENT
    CATKIND  := 'subject' | 'object' | 'contents' | 'lifecycle'

STRING is double-quoted with backslash escapes, IDENT is [a-z_][a-z0-9_]*,
`#` starts a comment running to end of line. LF and CRLF are both accepted;
the serializer emits LF.

Parsing is deterministic. Syntax errors stop at the first problem; semantic
checks (unknown references, branch coverage, duplicate ids) are collected so
a single run reports as much as possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import Diagnostic, ParseError, SourceSpan
from .model import (
    Answer,
    AskNode,
    CategoryKind,
    CategoryNode,
    Consequence,
    DEFAULT_PRIORITY,
    DEFAULT_RANK,
    Document,
    LeafNode,
    Node,
    Predicate,
    normalize_document,
    validate_document,
)

_CATEGORY_KINDS = {
    "subject": CategoryKind.SUBJECT,
    "object": CategoryKind.OBJECT,
    "contents": CategoryKind.CONTENTS,
    "lifecycle": CategoryKind.LIFECYCLE,
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}
_UNESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}


@dataclass(frozen=True)
class Token:
    kind: str  # WORD INT STRING LBRACE RBRACE LBRACK RBRACK COMMA ARROW EOF
    text: str
    value: object
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, len(self.text))


def _syntax(message: str, span: SourceSpan) -> ParseError:
    return ParseError([Diagnostic("SyntaxError", message, span)])


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def bump(k: int = 1) -> None:
        nonlocal i, col
        i += k
        col += k

    while i < n:
        ch = text[i]
        if ch == "\r" and i + 1 < n and text[i + 1] == "\n":
            i += 2
            line += 1
            col = 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t":
            bump()
            continue
        if ch == "#":
            while i < n and text[i] not in "\r\n":
                bump()
            continue
        start_line, start_col = line, col
        if ch == "{":
            tokens.append(Token("LBRACE", "{", None, start_line, start_col))
            bump()
        elif ch == "}":
            tokens.append(Token("RBRACE", "}", None, start_line, start_col))
            bump()
        elif ch == "[":
            tokens.append(Token("LBRACK", "[", None, start_line, start_col))
            bump()
        elif ch == "]":
            tokens.append(Token("RBRACK", "]", None, start_line, start_col))
            bump()
        elif ch == ",":
            tokens.append(Token("COMMA", ",", None, start_line, start_col))
            bump()
        elif ch == "-":
            if i + 1 < n and text[i + 1] == ">":
                tokens.append(Token("ARROW", "->", None, start_line, start_col))
                bump(2)
            else:
                raise _syntax("unexpected character '-'", SourceSpan(line, col, 1))
        elif ch == '"':
            bump()
            parts: list[str] = []
            raw = ['"']
            while True:
                if i >= n or text[i] in "\r\n":
                    raise _syntax("unterminated string",
                                  SourceSpan(start_line, start_col, len("".join(raw))))
                c = text[i]
                if c == '"':
                    raw.append(c)
                    bump()
                    break
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in _ESCAPES:
                        raise _syntax("unknown escape sequence", SourceSpan(line, col, 2))
                    parts.append(_ESCAPES[text[i + 1]])
                    raw.append(text[i:i + 2])
                    bump(2)
                else:
                    parts.append(c)
                    raw.append(c)
                    bump()
            lexeme = "".join(raw)
            tokens.append(Token("STRING", lexeme, "".join(parts), start_line, start_col))
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and (text[j].isalpha() or text[j] == "_"):
                raise _syntax("malformed number", SourceSpan(line, col, j - i + 1))
            lexeme = text[i:j]
            tokens.append(Token("INT", lexeme, int(lexeme), start_line, start_col))
            bump(j - i)
        elif ch == "_" or ("a" <= ch <= "z"):
            j = i
            while j < n and (text[j] == "_" or text[j].isdigit() or "a" <= text[j] <= "z"):
                j += 1
            lexeme = text[i:j]
            tokens.append(Token("WORD", lexeme, lexeme, start_line, start_col))
            bump(j - i)
        else:
            raise _syntax(f"unexpected character {ch!r}", SourceSpan(line, col, 1))
    tokens.append(Token("EOF", "", None, line, col))
    return tokens


# Raw nodes keep spans and authored branch order until semantic checks pass.

@dataclass
class _RawCategory:
    kind: CategoryKind
    label: str
    children: list
    span: SourceSpan


@dataclass
class _RawAsk:
    predicate: str
    branches: list  # (answer, child, answer_span)
    span: SourceSpan


@dataclass
class _RawLeaf:
    consequence: str
    span: SourceSpan


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[Diagnostic] = []
        self.predicates: list[Predicate] = []
        self.consequences: list[Consequence] = []
        self.decl_spans: dict[str, SourceSpan] = {}
        self.default_consequence: Optional[str] = None

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at_word(self, *words: str) -> bool:
        tok = self.peek()
        return tok.kind == "WORD" and tok.text in words

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.fail(f"expected {what}", tok)
        return self.next()

    def expect_word(self, word: str) -> Token:
        tok = self.peek()
        if not (tok.kind == "WORD" and tok.text == word):
            raise self.fail(f"expected '{word}'", tok)
        return self.next()

    def fail(self, message: str, tok: Token) -> ParseError:
        got = f", found {tok.text!r}" if tok.kind != "EOF" else ", found end of input"
        self.diags.append(
            Diagnostic("SyntaxError", message + got, tok.span))
        return ParseError(self.diags)

    def error(self, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(Diagnostic(code, message, span))

    # -- productions --------------------------------------------------------

    def document(self) -> Document:
        head = self.peek()
        if not self.at_word("tree"):
            if head.kind == "EOF":
                self.diags.append(Diagnostic(
                    "SyntaxError", "expected 'tree' header", SourceSpan(head.line, head.column, 0)))
                raise ParseError(self.diags)
            raise self.fail("expected 'tree' header", head)
        self.next()
        title = self.expect("STRING", "document title string").value

        if self.at_word("default"):
            self.next()
            self.expect_word("consequence")
            ident = self.expect("WORD", "consequence identifier")
            text = self.expect("STRING", "consequence text string").value
            self._declare_consequence(ident, text, DEFAULT_PRIORITY)
            self.default_consequence = ident.text

        while self.at_word("predicate", "consequence"):
            if self.peek().text == "predicate":
                self.predicate_decl()
            else:
                self.consequence_decl()

        root = self.node()
        trailing = self.peek()
        if trailing.kind != "EOF":
            raise self.fail("expected end of input after tree body", trailing)

        if self.diags:
            raise ParseError(self.diags)
        return self._finish(title, root)

    def predicate_decl(self) -> None:
        self.next()
        ident = self.expect("WORD", "predicate identifier")
        prompt = self.expect("STRING", "predicate prompt string").value
        options: Optional[tuple[str, ...]] = None
        tok = self.peek()
        if self.at_word("bool"):
            self.next()
        elif self.at_word("options"):
            self.next()
            self.expect("LBRACK", "'['")
            values: list[Token] = [self.expect("WORD", "domain value identifier")]
            while self.peek().kind == "COMMA":
                self.next()
                values.append(self.expect("WORD", "domain value identifier"))
            self.expect("RBRACK", "']'")
            seen = set()
            for v in values:
                if v.text in seen:
                    self.error("DuplicateId", f"duplicate domain value '{v.text}'", v.span)
                seen.add(v.text)
            if len(seen) < 2:
                self.error("DomainMismatch",
                           "enumerated domain needs at least 2 distinct values", tok.span)
            options = tuple(dict.fromkeys(v.text for v in values))
        else:
            raise self.fail("expected 'bool' or 'options' domain", tok)

        gate = False
        rank = DEFAULT_RANK
        while self.at_word("gate", "rank"):
            tag = self.next()
            if tag.text == "gate":
                gate = True
            else:
                rank = self.expect("INT", "rank value").value

        if self._check_fresh_id(ident):
            if options is not None and len(options) < 2:
                return  # already diagnosed; unconstructible
            self.predicates.append(Predicate(
                id=ident.text, prompt=prompt, options=options, gate=gate, rank=rank))

    def consequence_decl(self) -> None:
        self.next()
        ident = self.expect("WORD", "consequence identifier")
        text = self.expect("STRING", "consequence text string").value
        priority = DEFAULT_PRIORITY
        if self.at_word("priority"):
            self.next()
            priority = self.expect("INT", "priority value").value
        self._declare_consequence(ident, text, priority)

    def _declare_consequence(self, ident: Token, text: str, priority: int) -> None:
        if self._check_fresh_id(ident):
            if not text:
                self.error("SyntaxError", "consequence text must be non-empty", ident.span)
                return
            self.consequences.append(Consequence(id=ident.text, text=text, priority=priority))

    def _check_fresh_id(self, ident: Token) -> bool:
        if ident.text in self.decl_spans:
            self.error("DuplicateId", f"duplicate declaration id '{ident.text}'", ident.span)
            return False
        self.decl_spans[ident.text] = ident.span
        return True

    def node(self):
        tok = self.peek()
        if self.at_word("category"):
            return self.category()
        if self.at_word("ask"):
            return self.ask()
        if self.at_word("leaf"):
            return self.leaf()
        raise self.fail("expected 'category', 'ask' or 'leaf'", tok)

    def category(self) -> _RawCategory:
        kw = self.next()
        kind = CategoryKind.CUSTOM
        if self.peek().kind == "WORD":
            word = self.peek()
            if word.text in _CATEGORY_KINDS:
                kind = _CATEGORY_KINDS[word.text]
                self.next()
            else:
                raise self.fail("expected category kind or label string", word)
        label_tok = self.expect("STRING", "category label string")
        if not label_tok.value:
            self.error("SyntaxError", "category label must be non-empty", label_tok.span)
        self.expect("LBRACE", "'{'")
        children = []
        while self.peek().kind != "RBRACE":
            if self.peek().kind == "EOF":
                raise self.fail("expected '}' to close category", self.peek())
            children.append(self.node())
        if not children:
            self.error("SyntaxError", "category must contain at least one node", kw.span)
        self.next()  # RBRACE
        return _RawCategory(kind=kind, label=label_tok.value or "?",
                            children=children, span=kw.span)

    def ask(self) -> _RawAsk:
        self.next()
        ident = self.expect("WORD", "predicate identifier")
        predicate = next((p for p in self.predicates if p.id == ident.text), None)
        if predicate is None:
            self.error("UnknownPredicate",
                       f"ask references undeclared predicate '{ident.text}'", ident.span)
        self.expect("LBRACE", "'{'")
        branches = []
        while self.peek().kind != "RBRACE":
            if self.peek().kind == "EOF":
                raise self.fail("expected '}' to close ask", self.peek())
            answer_tok = self.expect("WORD", "branch answer")
            self.expect("ARROW", "'->'")
            child = self.node()
            branches.append((answer_tok, child))
        if not branches:
            self.error("SyntaxError", "ask must contain at least one branch", ident.span)
        self.next()  # RBRACE

        typed: list[tuple[Answer, object, SourceSpan]] = []
        if predicate is not None:
            seen: list[Answer] = []
            for answer_tok, child in branches:
                value = self._typed_answer(predicate, answer_tok)
                if value is None:
                    continue
                if value in seen:
                    self.error("DuplicateBranch",
                               f"duplicate branch {answer_tok.text!r} on ask '{predicate.id}'",
                               answer_tok.span)
                    continue
                seen.append(value)
                typed.append((value, child, answer_tok.span))
            missing = [v for v in predicate.domain if v not in seen]
            if missing:
                names = ", ".join(_answer_word(v) for v in missing)
                self.error("NonExhaustiveBranches",
                           f"ask '{predicate.id}' is missing branches for: {names}",
                           ident.span)
        return _RawAsk(predicate=ident.text, branches=typed, span=ident.span)

    def _typed_answer(self, predicate: Predicate, tok: Token) -> Optional[Answer]:
        if predicate.is_boolean:
            if tok.text == "yes":
                return True
            if tok.text == "no":
                return False
            self.error("DomainMismatch",
                       f"branch answer '{tok.text}' is not valid for boolean '{predicate.id}'",
                       tok.span)
            return None
        if tok.text in predicate.options:
            return tok.text
        self.error("DomainMismatch",
                   f"branch answer '{tok.text}' is not in the domain of '{predicate.id}'",
                   tok.span)
        return None

    def leaf(self) -> _RawLeaf:
        self.next()
        ident = self.expect("WORD", "consequence identifier")
        if all(c.id != ident.text for c in self.consequences):
            self.error("UnknownConsequence",
                       f"leaf references undeclared consequence '{ident.text}'", ident.span)
        return _RawLeaf(consequence=ident.text, span=ident.span)

    def _finish(self, title: str, raw) -> Document:
        def build(node) -> Node:
            if isinstance(node, _RawCategory):
                return CategoryNode(id="x", kind=node.kind, label=node.label,
                                    children=tuple(build(c) for c in node.children))
            if isinstance(node, _RawAsk):
                return AskNode(id="x", predicate=node.predicate,
                               branches=tuple((a, build(c)) for a, c, _ in node.branches))
            return LeafNode(id="x", consequence=node.consequence)

        doc = Document(
            title=title,
            predicates=tuple(self.predicates),
            consequences=tuple(self.consequences),
            root=build(raw),
            default_consequence=self.default_consequence,
        )
        doc = normalize_document(doc)
        leftovers = validate_document(doc)
        if leftovers:  # pragma: no cover - parser checks should subsume these
            raise ParseError(leftovers)
        return doc


def parse(text: str) -> Document:
    """Parse `.lex` source into a canonical Document.

    Raises ParseError carrying at least one Diagnostic on any failure.
    """
    return _Parser(_tokenize(text)).document()


# ---------------------------------------------------------------------------
# Serializer
# ---------------------------------------------------------------------------

def _string(value: str) -> str:
    return '"' + "".join(_UNESCAPES.get(c, c) for c in value) + '"'


def _answer_word(value: Answer) -> str:
    if value is True:
        return "yes"
    if value is False:
        return "no"
    return str(value)


def _predicate_line(p: Predicate) -> str:
    parts = ["predicate", p.id, _string(p.prompt)]
    if p.options is None:
        parts.append("bool")
    else:
        parts.append("options [" + ", ".join(p.options) + "]")
    if p.gate:
        parts.append("gate")
    if p.rank != DEFAULT_RANK:
        parts.append(f"rank {p.rank}")
    return " ".join(parts)


def _consequence_line(c: Consequence) -> str:
    line = f"consequence {c.id} {_string(c.text)}"
    if c.priority != DEFAULT_PRIORITY:
        line += f" priority {c.priority}"
    return line


def _node_lines(node: Node, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(node, LeafNode):
        return [f"{pad}leaf {node.consequence}"]
    if isinstance(node, CategoryNode):
        kind = "" if node.kind is CategoryKind.CUSTOM else node.kind.value + " "
        lines = [f"{pad}category {kind}{_string(node.label)} {{"]
        for child in node.children:
            lines.extend(_node_lines(child, indent + 1))
        lines.append(pad + "}")
        return lines
    lines = [f"{pad}ask {node.predicate} {{"]
    for answer, child in node.branches:
        child_lines = _node_lines(child, indent + 1)
        head = child_lines[0].lstrip()
        lines.append(f"{pad}  {_answer_word(answer)} -> {head}")
        lines.extend(child_lines[1:])
    lines.append(pad + "}")
    return lines


def serialize(doc: Document) -> str:
    """Render a Document in canonical form.

    Canonical means: 2-space indentation, declarations before the tree body,
    branches in domain order, LF line endings. ``parse(serialize(d))`` is
    structurally equal to ``d`` for canonical documents.
    """
    doc = normalize_document(doc)
    blocks: list[list[str]] = [[f"tree {_string(doc.title)}"]]
    consequences = list(doc.consequences)
    if doc.default_consequence is not None:
        default = doc.consequence(doc.default_consequence)
        consequences = [c for c in consequences if c.id != default.id]
        blocks.append([f"default consequence {default.id} {_string(default.text)}"])
    if doc.predicates:
        blocks.append([_predicate_line(p) for p in doc.predicates])
    if consequences:
        blocks.append([_consequence_line(c) for c in consequences])
    blocks.append(_node_lines(doc.root, 0))
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"
