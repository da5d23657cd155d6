from pathlib import Path

import pytest

from temprel.conllu import attach_parses, parse_conllu
from temprel.timeml import parse_timeml

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def load_fixture_doc(name: str, with_parses: bool = True):
    doc = parse_timeml((FIXTURES / "corpus" / f"{name}.tml").read_text())
    if with_parses:
        parses = parse_conllu((FIXTURES / "parses" / f"{name}.conllu").read_text())
        attach_parses(doc, parses)
    return doc


@pytest.fixture
def wedding_doc():
    return load_fixture_doc("wedding")


@pytest.fixture
def raid_doc():
    return load_fixture_doc("raid")


@pytest.fixture
def wedding_sentence(wedding_doc):
    return wedding_doc.sentences[0]
