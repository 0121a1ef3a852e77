"""Embedding spaces: similarity queries and (de)serialization."""

import numpy as np
import pytest

from depfew import (
    DependencyMatrixSet,
    EmbeddingSpace,
    FormatError,
    VersionError,
    Vocabulary,
    cosine,
    cosines_to_all,
    load_matrices,
    load_space,
    load_vectors_text,
    nearest_neighbors,
    rank_of_gold,
    save_matrices,
    save_space,
    write_vectors_text,
)
from depfew.spaces import FORMAT_VERSION, MAGIC

from conftest import make_space, random_space
from oracles import brute_force_rank


class TestCosine:
    def test_examples(self):
        e1, e2 = np.eye(2)
        assert cosine(e1, e2) == 0.0
        assert cosine(e1, 3.0 * e1) == pytest.approx(1.0, abs=1e-12)
        assert cosine(e1, -e1) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_norm(self):
        with pytest.raises(ValueError, match="zero-norm"):
            cosine(np.zeros(3), np.ones(3))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            cosine(np.ones(3), np.ones(4))

    def test_scale_invariance(self, rng):
        u, v = rng.normal(size=(2, 16))
        assert cosine(5.0 * u, v) == pytest.approx(cosine(u, v), abs=1e-12)


class TestRankOfGold:
    def test_inferred_equals_gold(self, rng):
        space = random_space(rng, 10, 4)
        assert rank_of_gold(space, space.vector("w3").astype(np.float64), "w3") == 1

    def test_crafted_cosines(self):
        # three words at cosine 0.9 / 0.5 / 0.1 to the query; gold is the 0.5 one
        query = np.array([1.0, 0.0])
        def at_cos(c):
            return np.array([c, np.sqrt(1 - c * c)])
        space = make_space(["near", "gold", "far"], [at_cos(0.9), at_cos(0.5), at_cos(0.1)])
        assert rank_of_gold(space, query, "gold") == 2
        assert rank_of_gold(space, query, "near") == 1
        assert rank_of_gold(space, query, "far") == 3

    def test_unknown_gold(self, rng):
        space = random_space(rng, 4, 3)
        with pytest.raises(KeyError):
            rank_of_gold(space, np.ones(3), "missing")

    def test_matches_brute_force(self, rng):
        for _ in range(25):
            n = int(rng.integers(3, 60))
            space = random_space(rng, n, 8)
            query = rng.normal(size=8)
            gold = f"w{int(rng.integers(n))}"
            expected = brute_force_rank(space.vocab.words, space.vectors.tolist(),
                                        query.tolist(), gold)
            assert rank_of_gold(space, query, gold) == expected


class TestNeighbors:
    def test_ties_in_vocabulary_order(self):
        space = make_space(["a", "b", "c"], [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        got = nearest_neighbors(space, np.array([1.0, 0.0]), 3)
        assert [w for w, _ in got] == ["a", "b", "c"]

    def test_zero_rows_rank_last(self):
        sims = cosines_to_all(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 0.0]))
        assert sims[1] == -np.inf


def random_instance(rng, with_context=False):
    n = int(rng.integers(1, 40))
    dim = int(rng.integers(1, 24))
    space = random_space(rng, n, dim)
    if with_context:
        m = int(rng.integers(1, 40))
        ctx_vocab = Vocabulary([f"c{i}" for i in range(m)],
                               rng.integers(1, 9, size=m).tolist(), lowercase=False)
        space = EmbeddingSpace(space.vocab, space.vectors, ctx_vocab,
                               rng.normal(size=(m, dim)))
    return space


class TestSpaceSerialization:
    def test_round_trip_values(self, rng, tmp_path):
        space = random_instance(rng, with_context=True)
        path = tmp_path / "space.bin"
        save_space(space, path)
        loaded = load_space(path)
        assert loaded.vocab == space.vocab
        np.testing.assert_array_equal(loaded.vectors, space.vectors)
        assert loaded.context_vocab == space.context_vocab
        np.testing.assert_array_equal(loaded.context_vectors, space.context_vectors)

    def test_round_trip_bitwise(self, rng, tmp_path):
        for case in range(6):
            space = random_instance(rng, with_context=case % 2 == 0)
            p1, p2 = tmp_path / f"{case}_a.bin", tmp_path / f"{case}_b.bin"
            save_space(space, p1)
            save_space(load_space(p1), p2)
            assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, rng, tmp_path):
        path = tmp_path / "space.bin"
        save_space(random_instance(rng), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            load_space(path)

    def test_version_bump(self, rng, tmp_path):
        path = tmp_path / "space.bin"
        save_space(random_instance(rng), path)
        blob = bytearray(path.read_bytes())
        blob[4:8] = (FORMAT_VERSION + 1).to_bytes(4, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionError):
            load_space(path)

    def test_truncation(self, rng, tmp_path):
        path = tmp_path / "space.bin"
        save_space(random_instance(rng), path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(FormatError):
            load_space(path)

    def test_trailing_garbage(self, rng, tmp_path):
        path = tmp_path / "space.bin"
        save_space(random_instance(rng), path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError):
            load_space(path)

    def test_magic_prefix(self, rng, tmp_path):
        path = tmp_path / "space.bin"
        save_space(random_instance(rng), path)
        assert path.read_bytes()[:4] == MAGIC

    def test_wrong_kind(self, rng, tmp_path):
        # a matrix file is not a space file even though the magic matches
        path = tmp_path / "matrices.bin"
        save_matrices(DependencyMatrixSet(["nsubj"], rng.normal(size=(1, 3, 3))), path)
        with pytest.raises(FormatError):
            load_space(path)


class TestMatrixSerialization:
    def test_round_trip(self, rng, tmp_path):
        mset = DependencyMatrixSet(["nsubj", "obj-1"], rng.normal(size=(2, 5, 5)))
        path = tmp_path / "matrices.bin"
        save_matrices(mset, path)
        loaded = load_matrices(path)
        assert loaded.labels == mset.labels
        np.testing.assert_array_equal(loaded.matrices, mset.matrices)

    def test_identities(self):
        mset = DependencyMatrixSet.identities(["a", "b"], 4)
        np.testing.assert_array_equal(mset.matrix("a"), np.eye(4, dtype=np.float32))
        assert mset.get("missing") is None
        with pytest.raises(KeyError):
            mset.matrix("missing")


class TestTextVectors:
    def test_round_trip(self, rng, tmp_path):
        words = ["alpha", "beta"]
        vectors = rng.normal(size=(2, 3)).astype(np.float32)
        path = tmp_path / "vectors.txt"
        write_vectors_text(words, vectors, path)
        header = path.read_text().splitlines()[0]
        assert header == "2 3"
        got_words, got_vectors = load_vectors_text(path)
        assert got_words == words
        np.testing.assert_allclose(got_vectors, vectors, rtol=1e-6)
