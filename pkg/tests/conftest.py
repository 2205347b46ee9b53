import json
from pathlib import Path

import pytest

from ldeb import DialogueVectorizer, load_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(FIXTURES / "dialogues.txt", FIXTURES / "emotions.txt")


@pytest.fixture(scope="session")
def expected() -> dict:
    return json.loads((FIXTURES / "expected.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fitted_vectorizer(corpus):
    return DialogueVectorizer().fit(corpus)


@pytest.fixture(scope="session")
def X(corpus, fitted_vectorizer):
    return fitted_vectorizer.transform(corpus)
