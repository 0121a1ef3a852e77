"""Shared builders: hand-rolled sentences, random parse graphs, tiny spaces."""

import numpy as np
import pytest

from depfew import DependencyMatrixSet, EmbeddingSpace, ParsedSentence, Token, Vocabulary

# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)

LABEL_POOL = ("nsubj", "obj", "amod", "nmod", "advmod", "det")


def make_sentence(heads, labels=None, forms=None) -> ParsedSentence:
    """Sentence from 1-based head indices; token i defaults to form w{i}."""
    n = len(heads)
    if labels is None:
        labels = [LABEL_POOL[i % len(LABEL_POOL)] for i in range(n)]
    if forms is None:
        forms = [f"w{i + 1}" for i in range(n)]
    return ParsedSentence(tuple(
        Token(i + 1, forms[i], heads[i], labels[i]) for i in range(n)))


def random_sentence(rng, max_tokens=8) -> ParsedSentence:
    """Random functional parse graph; may contain cycles and several fragments."""
    n = int(rng.integers(2, max_tokens + 1))
    heads = []
    for i in range(1, n + 1):
        choices = [h for h in range(n + 1) if h != i]
        heads.append(choices[int(rng.integers(len(choices)))])
    labels = [LABEL_POOL[int(rng.integers(len(LABEL_POOL)))] for _ in range(n)]
    return make_sentence(heads, labels)


def make_space(words, vectors, counts=None) -> EmbeddingSpace:
    counts = [1] * len(words) if counts is None else counts
    return EmbeddingSpace(Vocabulary(list(words), counts), np.asarray(vectors))


def random_space(rng, n_words, dim, prefix="w") -> EmbeddingSpace:
    words = [f"{prefix}{i}" for i in range(n_words)]
    counts = rng.integers(1, 50, size=n_words).tolist()
    vectors = rng.normal(size=(n_words, dim))
    return make_space(words, vectors, counts)


def random_matrix_set(rng, labels, dim) -> DependencyMatrixSet:
    return DependencyMatrixSet(list(labels), rng.normal(size=(len(labels), dim, dim)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Arc shape shared by several tests: a clause whose subject noun governs both
# a determiner and an adjective, with an object on the other side of the verb.
#   w4 is the root verb; w3 -nsubj-> w4; w1 -det-> w3; w2 -amod-> w3; w5 -obj-> w4
@pytest.fixture
def clause_sentence():
    return make_sentence(
        heads=[3, 3, 4, 0, 4],
        labels=["det", "amod", "nsubj", "root", "obj"],
    )
