from pathlib import Path

import pytest
from hypothesis import settings

from lextree import compile_document, parse

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "lextree" / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def vietnam_doc():
    return parse(fixture_text("vietnam.lex"))


@pytest.fixture(scope="session")
def vietnam_tree(vietnam_doc):
    return compile_document(vietnam_doc)


@pytest.fixture(scope="session")
def china_doc():
    return parse(fixture_text("china.lex"))


@pytest.fixture(scope="session")
def lex_specialis_doc():
    return parse(fixture_text("lex_specialis.lex"))


@pytest.fixture(scope="session")
def conflicting_doc():
    return parse(fixture_text("conflicting.lex"))
