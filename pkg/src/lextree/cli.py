"""Command-line entry point.

Exit codes are a scripting contract: 0 success, 1 diagnostics or conflicts
found, 2 usage error, 3 I/O error. Data goes to stdout, diagnostics to
stderr, and identical invocations on identical files produce byte-identical
stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Union

from . import __version__
from .compiler import CompiledTree, analyze, compile_document
from .dot import export_dot
from .dsl import parse
from .engine import Done, evaluate, start
from .errors import (
    ConflictDetected,
    LexTreeError,
    ParseError,
)
from .jsonio import export_json, import_json
from .model import Document

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _print_diagnostics(path: str, err: ParseError) -> None:
    for diag in err.diagnostics:
        print(f"{path}:{diag.render()}", file=sys.stderr)


def _load_document(path: str) -> Document:
    """Load a document from `.lex` source or document-interchange JSON."""
    if path.endswith(".json"):
        obj = import_json(Path(path).read_bytes())
        if not isinstance(obj, Document):
            raise LexTreeError(f"{path}: expected a document, found a compiled tree")
        return obj
    return parse(_read_text(path))


def _load_tree(path: str) -> CompiledTree:
    """Load a compiled tree, compiling on the fly when given a document."""
    if path.endswith(".json"):
        obj = import_json(Path(path).read_bytes())
        if isinstance(obj, CompiledTree):
            return obj
        return compile_document(obj)
    return compile_document(parse(_read_text(path)))


def _write_out(data: Union[str, bytes], out: Optional[str]) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def cmd_compile(args: argparse.Namespace) -> int:
    doc = _load_document(args.input)
    tree = compile_document(doc)
    if args.format == "dot":
        _write_out(export_dot(tree), args.out)
    else:
        _write_out(export_json(tree), args.out)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    doc = _load_document(args.input)
    report = analyze(doc, cap=args.cap)
    if args.report == "json":
        payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n"
        sys.stdout.write(payload)
    else:
        sys.stdout.write(f'analysis of "{doc.title}"\n')
        sys.stdout.write(report.render_text())
    sys.stdout.flush()
    return EXIT_FINDINGS if report.conflicts else EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    tree = _load_tree(args.tree)
    facts = json.loads(_read_text(args.facts))
    if not isinstance(facts, dict):
        raise LexTreeError(f"{args.facts}: facts file must be a JSON object")
    trace = evaluate(tree, facts, strict=not args.lenient)
    payload = {"format_version": 1, "trace": trace.to_json_dict()}
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    sys.stdout.flush()
    return EXIT_OK


def cmd_ask(args: argparse.Namespace) -> int:
    tree = _load_tree(args.tree)
    session = start(tree)
    print(f"Consultation: {tree.source_title}")
    print("Answer with yes/no; 'undo' steps back, 'quit' aborts.")
    while True:
        status = session.status
        if isinstance(status, Done):
            print()
            print(f"Outcome: {status.text}")
            for i, step in enumerate(status.trace.steps, start=1):
                print(f"  {i}. {step.prompt} {step.answer}")
            return EXIT_OK
        print()
        print(f"[{len(session.answered) + 1}] {status.prompt} (yes/no)")
        line = sys.stdin.readline()
        if not line:
            print("(end of input)", file=sys.stderr)
            return EXIT_OK
        reply = line.strip().lower()
        if reply in ("quit", "q"):
            return EXIT_OK
        if reply == "undo":
            try:
                session = session.undo()
            except LexTreeError as exc:
                print(f"cannot undo: {exc}", file=sys.stderr)
            continue
        if reply in ("y", "yes"):
            session = session.answer("yes")
        elif reply in ("n", "no"):
            session = session.answer("no")
        else:
            print(f"unrecognized reply {reply!r}", file=sys.stderr)


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import run_server  # deferred: only the server needs sockets

    doc = _load_document(args.tree)
    tree = compile_document(doc)
    return run_server(doc, tree, host=args.host, port=args.port,
                      cors_origin=args.cors_origin)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lextree",
        description="Author statutory rules as trees, compile them to binary "
                    "decision trees, audit them for contradictions, and answer "
                    "legal-consequence queries.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a document to a decision tree")
    p.add_argument("input", help="path to a .lex document or document .json")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="audit a document for conflicts and gaps")
    p.add_argument("input", help="path to a .lex document or document .json")
    p.add_argument("--report", choices=("text", "json"), default="text")
    p.add_argument("--cap", type=int, default=10**6,
                   help="refuse exhaustive analysis beyond this many assignments")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a tree against a facts file")
    p.add_argument("tree", help="compiled tree .json (or a document to compile)")
    p.add_argument("--facts", required=True, help="JSON map of predicate to answer")
    p.add_argument("--lenient", action="store_true",
                   help="ignore unknown predicates in the facts file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ask", help="interactive consultation in the terminal")
    p.add_argument("tree", help="compiled tree .json (or a document to compile)")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("serve", help="serve the HTTP consultation API")
    p.add_argument("--tree", required=True, help="document to load (.lex or .json)")
    p.add_argument("--port", type=int, default=8713)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--cors-origin", default=None,
                   help="enable CORS for this origin (disabled by default)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        source = getattr(args, "input", None) or getattr(args, "tree", "<input>")
        _print_diagnostics(source, exc)
        return EXIT_FINDINGS
    except ConflictDetected as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.stderr.write(exc.report.render_text())
        return EXIT_FINDINGS
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LexTreeError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
