"""Embedding spaces and dependency matrices: queries and on-disk formats.

The binary format is little-endian with a fixed header (magic "DFEW",
version, record kind) so that space and matrix files are self-describing
and round-trip bit-exactly.  A plain-text export ("word v1 ... v_dim" rows
under a "<rows> <dim>" header) is provided for interoperability; text files
are exact only to printed precision.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Sequence

import numpy as np

from .corpus import Vocabulary

MAGIC = b"DFEW"
FORMAT_VERSION = 1
KIND_SPACE = 1
KIND_MATRICES = 2


class FormatError(ValueError):
    """File is not a well-formed space/matrix record."""


class VersionError(ValueError):
    """File was written by an incompatible format version."""


@dataclass
class EmbeddingSpace:
    """Vocabulary-aligned dense vectors; one target vector per word.

    ``vectors`` holds the published per-word embeddings.  Skip-Gram variants
    may carry their output-side table in ``context_vectors`` (aligned with
    ``context_vocab``); inference never touches it.
    """

    vocab: Vocabulary
    vectors: np.ndarray
    context_vocab: Optional[Vocabulary] = None
    context_vectors: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(self.vocab) != self.vectors.shape[0]:
            raise ValueError(f"vocabulary size {len(self.vocab)} != row count {self.vectors.shape[0]}")
        if not np.isfinite(self.vectors).all():
            raise ValueError("non-finite vector components")
        if self.context_vectors is not None:
            self.context_vectors = np.ascontiguousarray(self.context_vectors, dtype=np.float32)
            if self.context_vocab is None:
                raise ValueError("context vectors require a context vocabulary")
            if len(self.context_vocab) != self.context_vectors.shape[0]:
                raise ValueError("context vocabulary size != context row count")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.vocab.id_of(word)]


@dataclass
class DependencyMatrixSet:
    """One square matrix per directed dependency label (label and label-1 are distinct)."""

    labels: list[str]
    matrices: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.matrices = np.ascontiguousarray(self.matrices, dtype=np.float32)
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise ValueError("matrices must have shape (labels, dim, dim)")
        if len(self.labels) != self.matrices.shape[0]:
            raise ValueError("label list length != matrix count")
        if not np.isfinite(self.matrices).all():
            raise ValueError("non-finite matrix entries")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise ValueError("duplicate labels")

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def get(self, label: str) -> Optional[np.ndarray]:
        idx = self._index.get(label)
        return None if idx is None else self.matrices[idx]

    def matrix(self, label: str) -> np.ndarray:
        idx = self._index.get(label)
        if idx is None:
            raise KeyError(f"no matrix for label {label!r}")
        return self.matrices[idx]

    @classmethod
    def identities(cls, labels: Sequence[str], dim: int) -> "DependencyMatrixSet":
        eye = np.broadcast_to(np.eye(dim, dtype=np.float32), (len(labels), dim, dim)).copy()
        return cls(list(labels), eye)


# --- similarity queries --------------------------------------------------------

def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; raises on shape mismatch or zero-norm input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero-norm vectors")
    return float(u @ v / (nu * nv))


def cosines_to_all(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine of the query against every row; zero-norm rows map to -inf."""
    query = np.asarray(query, dtype=np.float64)
    qnorm = np.linalg.norm(query)
    if qnorm == 0.0:
        raise ValueError("cosine undefined for a zero-norm query")
    mat = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1)
    sims = np.full(mat.shape[0], -np.inf)
    nonzero = norms > 0.0
    sims[nonzero] = (mat[nonzero] @ query) / (norms[nonzero] * qnorm)
    return sims


def rank_of_gold(space: EmbeddingSpace, inferred: np.ndarray, gold_word: str) -> int:
    """1 + number of words strictly closer to the inferred vector than the gold word."""
    gold_id = space.vocab.lookup(gold_word)
    if gold_id is None:
        raise KeyError(f"gold word {gold_word!r} not in vocabulary")
    sims = cosines_to_all(space.vectors, inferred)
    if not np.isfinite(sims[gold_id]):
        raise ValueError(f"gold word {gold_word!r} has a zero-norm vector")
    return 1 + int(np.sum(sims > sims[gold_id]))


def nearest_neighbors(space: EmbeddingSpace, query: np.ndarray, k: int) -> list[tuple[str, float]]:
    """Top-k words by cosine, ties broken by vocabulary order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    sims = cosines_to_all(space.vectors, query)
    order = np.argsort(-sims, kind="stable")[:k]
    return [(space.vocab.word_of(int(i)), float(sims[i])) for i in order]


# --- binary format --------------------------------------------------------------

class _Reader:
    def __init__(self, fh: BinaryIO):
        self.fh = fh

    def bytes(self, n: int) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise FormatError("truncated file")
        return data

    def u32(self) -> int:
        return struct.unpack("<I", self.bytes(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.bytes(8))[0]

    def string(self) -> str:
        return self.bytes(self.u32()).decode("utf-8")

    def f32_array(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        data = self.bytes(count * 4)
        return np.frombuffer(data, dtype="<f4").reshape(shape).copy()


def _write_header(fh: BinaryIO, kind: int) -> None:
    fh.write(MAGIC)
    fh.write(struct.pack("<II", FORMAT_VERSION, kind))


def _read_header(reader: _Reader, expected_kind: int) -> None:
    if reader.bytes(4) != MAGIC:
        raise FormatError("bad magic number")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise VersionError(f"unsupported format version {version}")
    kind = reader.u32()
    if kind != expected_kind:
        raise FormatError(f"record kind {kind} where {expected_kind} was expected")


def _write_string(fh: BinaryIO, text: str) -> None:
    data = text.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


def _write_vocab(fh: BinaryIO, vocab: Vocabulary) -> None:
    fh.write(struct.pack("<III", len(vocab), vocab.min_count, int(vocab.lowercase)))
    for word, count in zip(vocab.words, vocab.counts):
        _write_string(fh, word)
        fh.write(struct.pack("<Q", int(count)))


def _read_vocab(reader: _Reader) -> Vocabulary:
    size = reader.u32()
    min_count = reader.u32()
    lowercase = bool(reader.u32())
    words: list[str] = []
    counts: list[int] = []
    for _ in range(size):
        words.append(reader.string())
        counts.append(reader.u64())
    return Vocabulary(words, counts, min_count=min_count, lowercase=lowercase)


def save_space(space: EmbeddingSpace, path) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, KIND_SPACE)
        fh.write(struct.pack("<I", space.dim))
        _write_vocab(fh, space.vocab)
        fh.write(struct.pack("<I", int(space.context_vectors is not None)))
        if space.context_vectors is not None:
            _write_vocab(fh, space.context_vocab)
        fh.write(space.vectors.astype("<f4", copy=False).tobytes(order="C"))
        if space.context_vectors is not None:
            fh.write(space.context_vectors.astype("<f4", copy=False).tobytes(order="C"))


def load_space(path) -> EmbeddingSpace:
    with open(path, "rb") as fh:
        reader = _Reader(fh)
        _read_header(reader, KIND_SPACE)
        dim = reader.u32()
        vocab = _read_vocab(reader)
        has_context = reader.u32()
        context_vocab = _read_vocab(reader) if has_context else None
        vectors = reader.f32_array((len(vocab), dim))
        context_vectors = reader.f32_array((len(context_vocab), dim)) if has_context else None
        if fh.read(1):
            raise FormatError("trailing bytes after payload")
    return EmbeddingSpace(vocab, vectors, context_vocab=context_vocab,
                          context_vectors=context_vectors)


def save_matrices(mset: DependencyMatrixSet, path) -> None:
    with open(path, "wb") as fh:
        _write_header(fh, KIND_MATRICES)
        fh.write(struct.pack("<II", mset.dim, len(mset.labels)))
        for label in mset.labels:
            _write_string(fh, label)
        fh.write(mset.matrices.astype("<f4", copy=False).tobytes(order="C"))


def load_matrices(path) -> DependencyMatrixSet:
    with open(path, "rb") as fh:
        reader = _Reader(fh)
        _read_header(reader, KIND_MATRICES)
        dim = reader.u32()
        nlabels = reader.u32()
        labels = [reader.string() for _ in range(nlabels)]
        matrices = reader.f32_array((nlabels, dim, dim))
        if fh.read(1):
            raise FormatError("trailing bytes after payload")
    return DependencyMatrixSet(labels, matrices)


# --- text export -----------------------------------------------------------------

def write_vectors_text(words: Sequence[str], vectors: np.ndarray, path) -> None:
    """word2vec-style text export; components printed with 9 significant digits."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{vectors.shape[0]} {vectors.shape[1]}\n")
        for word, row in zip(words, vectors):
            fh.write(word + " " + " ".join(f"{x:.9g}" for x in row) + "\n")


def save_space_text(space: EmbeddingSpace, path) -> None:
    write_vectors_text(space.vocab.words, space.vectors, path)


def load_vectors_text(path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError("expected '<rows> <dim>' header")
        rows, dim = int(header[0]), int(header[1])
        words: list[str] = []
        vectors = np.empty((rows, dim), dtype=np.float32)
        for i in range(rows):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise FormatError(f"row {i}: expected {dim} components")
            words.append(parts[0])
            vectors[i] = [float(x) for x in parts[1:]]
    return words, vectors
