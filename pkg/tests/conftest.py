import pytest

from projed import bundled_language_path, load_language_file

CORPUS = ["dna", "boxes", "lambda_calculus", "nested_graph", "class_models", "dungeon"]

START_CLAUSE = {
    "dna": "DNA",
    "boxes": "root",
    "lambda_calculus": "exp",
    "nested_graph": "machine",
    "class_models": "model",
    "dungeon": "game",
}


@pytest.fixture(scope="session")
def corpus():
    return {name: load_language_file(bundled_language_path(name)) for name in CORPUS}


@pytest.fixture
def dna(corpus):
    return corpus["dna"]


@pytest.fixture
def boxes(corpus):
    return corpus["boxes"]


@pytest.fixture
def lam(corpus):
    return corpus["lambda_calculus"]


@pytest.fixture
def nested(corpus):
    return corpus["nested_graph"]


@pytest.fixture
def classes(corpus):
    return corpus["class_models"]


@pytest.fixture
def dungeon(corpus):
    return corpus["dungeon"]
