"""Few-shot inference of a rare word's vector from parsed context sentences.

Three methods build on one weighted-sum core.  Every context occurrence c at
surface distance m from the target slot contributes

    v_c_add = s(c) * r(c) * (v_c - k * g)

with subsampling weight s, window weight r and the noise-weighted mean vector
g.  The additive method sums these terms; the dependency-additive method
scales each by 1 + 1/d_c where d_c is the dependency distance to the slot;
the matrix-additive method multiplies each by the chain of dependency
matrices along the parse path from the slot to the occurrence.

All functions are pure and read-only over the space; results are float64.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from .corpus import (
    NoiseDistribution,
    ParsedSentence,
    invert_label,
    noise_distribution,
    subsample_weight,
    window_weight,
)
from .spaces import DependencyMatrixSet, EmbeddingSpace
from .stopwords import ENGLISH_STOPWORDS

METHODS = ("additive", "dep-additive", "dm-additive")

TARGET_PLACEHOLDER = "___"

UNREACHABLE = None  # no parse path between the two tokens


class EmptyContextError(ValueError):
    """No usable (in-vocabulary, non-stop) context word was found."""


@dataclass(frozen=True)
class FewShotContext:
    """Context sentences plus the 1-based position of the rare-word slot in each."""

    sentences: tuple[ParsedSentence, ...]
    target_positions: tuple[int, ...]
    target_form: str = TARGET_PLACEHOLDER

    def __post_init__(self):
        if len(self.sentences) != len(self.target_positions):
            raise ValueError("one target position per sentence required")
        if not self.sentences:
            raise ValueError("context needs at least one sentence")
        for sent, pos in zip(self.sentences, self.target_positions):
            if not 1 <= pos <= len(sent.tokens):
                raise ValueError(f"target position {pos} outside sentence of {len(sent)} tokens")
            if sent.tokens[pos - 1].form != self.target_form:
                raise ValueError(
                    f"token at position {pos} is {sent.tokens[pos - 1].form!r}, "
                    f"expected target form {self.target_form!r}")

    @classmethod
    def from_sentences(cls, sentences: Sequence[ParsedSentence],
                       target_form: str = TARGET_PLACEHOLDER) -> "FewShotContext":
        """Locate the single occurrence of ``target_form`` in every sentence."""
        positions = []
        for ordinal, sent in enumerate(sentences, start=1):
            hits = [tok.index for tok in sent.tokens if tok.form == target_form]
            if len(hits) != 1:
                raise ValueError(
                    f"sentence {ordinal}: expected exactly one {target_form!r} token, "
                    f"found {len(hits)}")
            positions.append(hits[0])
        return cls(tuple(sentences), tuple(positions), target_form)

    def subset(self, indices: Sequence[int]) -> "FewShotContext":
        """Context restricted to the given sentence indices (dataset order kept by caller)."""
        return FewShotContext(tuple(self.sentences[i] for i in indices),
                              tuple(self.target_positions[i] for i in indices),
                              self.target_form)


@dataclass(frozen=True)
class FSLConfig:
    tau: float = 1e-6
    k: int = 15
    n: int = 5
    stopwords: frozenset[str] = ENGLISH_STOPWORDS
    method: str = "additive"
    reverse_matrix_order: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.k < 0 or self.n < 1:
            raise ValueError("k must be >= 0 and n >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class NegSamplingVector:
    """g = sum_w n(w) v_w, the vector subtracted (scaled by k) from every context."""

    vector: np.ndarray


def negative_sampling_vector(space: EmbeddingSpace,
                             noise: NoiseDistribution) -> NegSamplingVector:
    """Noise-probability-weighted mean of all background vectors."""
    if len(noise) != len(space.vocab):
        raise ValueError(f"noise distribution over {len(noise)} words does not match "
                         f"vocabulary of {len(space.vocab)}")
    return NegSamplingVector(noise.probabilities @ space.vectors.astype(np.float64))


def context_term(word_id: int, m: int, space: EmbeddingSpace,
                 g: NegSamplingVector, cfg: FSLConfig) -> np.ndarray:
    """s(c) r(c) (v_c - k g) for one occurrence at surface distance m."""
    r = window_weight(m, cfg.n)
    if r == 0.0:
        return np.zeros(space.dim)
    s = subsample_weight(space.vocab.rel_freq(word_id), cfg.tau)
    return (s * r) * (space.vectors[word_id].astype(np.float64) - cfg.k * g.vector)


# --- parse-graph distances and paths --------------------------------------------

def _check_index(sentence: ParsedSentence, idx: int):
    if not 1 <= idx <= len(sentence.tokens):
        raise ValueError(f"token index {idx} outside sentence of {len(sentence)} tokens")


def _bfs_distances(adjacency: dict[int, list[int]], start: int) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nbr in adjacency[node]:
            if nbr not in dist:
                dist[nbr] = dist[node] + 1
                queue.append(nbr)
    return dist


def dependency_distance(sentence: ParsedSentence, i: int, j: int) -> Optional[int]:
    """Arcs on the shortest undirected parse path i..j; UNREACHABLE if disconnected."""
    _check_index(sentence, i)
    _check_index(sentence, j)
    if i == j:
        return 0
    return _bfs_distances(sentence.adjacency(), i).get(j, UNREACHABLE)


def dep_weight(d: Optional[int]) -> float:
    """1 + 1/d; UNREACHABLE gets the d -> infinity limit 1."""
    if d is UNREACHABLE:
        return 1.0
    if d < 1:
        raise ValueError(f"dependency distance must be >= 1, got {d}")
    return 1.0 + 1.0 / d


def dependency_path(sentence: ParsedSentence, i: int, j: int) -> Optional[list[str]]:
    """Directed labels along the shortest parse path from i to j.

    Arcs traversed head-to-dependent keep their label; the opposite direction
    appends the inverse suffix.  Among equal-length paths the one with the
    lexicographically smallest intermediate token indices is chosen.  Returns
    UNREACHABLE when the tokens are disconnected, [] when i = j.
    """
    _check_index(sentence, i)
    _check_index(sentence, j)
    if i == j:
        return []
    adjacency = sentence.adjacency()
    dist = _bfs_distances(adjacency, j)
    if i not in dist:
        return UNREACHABLE
    arc_labels = {(head, dep): label for head, dep, label in sentence.arcs}
    labels: list[str] = []
    node = i
    while node != j:
        # adjacency lists are sorted, so the first qualifying neighbor is smallest
        nxt = next(n for n in adjacency[node] if dist.get(n) == dist[node] - 1)
        if (node, nxt) in arc_labels:
            labels.append(arc_labels[(node, nxt)])
        else:
            labels.append(invert_label(arc_labels[(nxt, node)]))
        node = nxt
    return labels


# --- inference -----------------------------------------------------------------

@dataclass
class ContextWordRecord:
    """Per-occurrence diagnostics: how one context token was treated."""

    sentence: int
    position: int
    form: str
    status: str  # used | stopword | oov
    weight: Optional[float] = None
    distance: Optional[int] = None
    path: Optional[list[str]] = None


def write_diagnostics(records: Sequence[ContextWordRecord], stream: TextIO) -> None:
    """One occurrence per line as space-separated key=value pairs."""
    for rec in records:
        parts = [f"sentence={rec.sentence}", f"position={rec.position}",
                 f"form={rec.form}", f"status={rec.status}"]
        if rec.weight is not None:
            parts.append(f"weight={rec.weight:.6g}")
        if rec.distance is not None:
            parts.append(f"distance={rec.distance}")
        if rec.path is not None:
            parts.append("path=" + (",".join(rec.path) if rec.path else "-"))
        stream.write(" ".join(parts) + "\n")


def _chain_apply(matrices: DependencyMatrixSet, path: Optional[list[str]],
                 vec: np.ndarray, reverse: bool) -> np.ndarray:
    """Multiply vec by the matrices along the path, context-side matrix first.

    With path [d1 .. dm] ordered target-to-context the result is
    T_d1 (T_d2 (... (T_dm vec))); ``reverse`` applies the target-side matrix
    first instead.  Unreachable contexts and unseen labels use the identity.
    """
    if path is UNREACHABLE:
        return vec
    for label in (path if reverse else reversed(path)):
        matrix = matrices.get(label)
        if matrix is not None:
            vec = matrix.astype(np.float64) @ vec
    return vec


def _infer(context: FewShotContext, space: EmbeddingSpace, cfg: FSLConfig,
           method: str, matrices: Optional[DependencyMatrixSet],
           g: Optional[NegSamplingVector],
           diagnostics: Optional[list[ContextWordRecord]]) -> np.ndarray:
    if method == "dm-additive":
        if matrices is None:
            raise ValueError("dm-additive requires a dependency matrix set")
        if matrices.dim != space.dim:
            raise ValueError(f"matrix dim {matrices.dim} does not match space dim {space.dim}")
    if g is None:
        g = negative_sampling_vector(space, noise_distribution(space.vocab))

    total = np.zeros(space.dim)
    usable = 0
    for ordinal, (sent, tpos) in enumerate(
            zip(context.sentences, context.target_positions), start=1):
        for tok in sent.tokens:
            if tok.index == tpos:
                continue
            if tok.form.lower() in cfg.stopwords:
                if diagnostics is not None:
                    diagnostics.append(ContextWordRecord(ordinal, tok.index, tok.form, "stopword"))
                continue
            wid = space.vocab.lookup(tok.form)
            if wid is None:
                if diagnostics is not None:
                    diagnostics.append(ContextWordRecord(ordinal, tok.index, tok.form, "oov"))
                continue
            usable += 1
            term = context_term(wid, abs(tok.index - tpos), space, g, cfg)
            dist = path = None
            if method == "dep-additive":
                dist = dependency_distance(sent, tpos, tok.index)
                term = dep_weight(dist) * term
            elif method == "dm-additive":
                path = dependency_path(sent, tpos, tok.index)
                dist = len(path) if path is not UNREACHABLE else None
                term = _chain_apply(matrices, path, term, cfg.reverse_matrix_order)
            total += term
            if diagnostics is not None:
                s = subsample_weight(space.vocab.rel_freq(wid), cfg.tau)
                r = window_weight(abs(tok.index - tpos), cfg.n)
                weight = s * r * (dep_weight(dist) if method == "dep-additive" else 1.0)
                diagnostics.append(ContextWordRecord(
                    ordinal, tok.index, tok.form, "used", weight=weight,
                    distance=dist, path=path if method == "dm-additive" else None))
    if usable == 0:
        raise EmptyContextError("no usable context word (all out-of-vocabulary or stop words)")
    return total


def infer_additive(context: FewShotContext, space: EmbeddingSpace, cfg: FSLConfig,
                   g: Optional[NegSamplingVector] = None,
                   diagnostics: Optional[list[ContextWordRecord]] = None) -> np.ndarray:
    """Sum of the weighted context terms over all occurrences."""
    return _infer(context, space, cfg, "additive", None, g, diagnostics)


def infer_dep_additive(context: FewShotContext, space: EmbeddingSpace, cfg: FSLConfig,
                       g: Optional[NegSamplingVector] = None,
                       diagnostics: Optional[list[ContextWordRecord]] = None) -> np.ndarray:
    """Additive sum with each term scaled by 1 + 1/d_c."""
    return _infer(context, space, cfg, "dep-additive", None, g, diagnostics)


def infer_dm_additive(context: FewShotContext, space: EmbeddingSpace,
                      matrices: DependencyMatrixSet, cfg: FSLConfig,
                      g: Optional[NegSamplingVector] = None,
                      diagnostics: Optional[list[ContextWordRecord]] = None) -> np.ndarray:
    """Additive sum with each term transformed along its dependency path."""
    return _infer(context, space, cfg, "dm-additive", matrices, g, diagnostics)


class Inferencer:
    """Caches the negative-sampling vector for repeated inferences over one space."""

    def __init__(self, space: EmbeddingSpace, cfg: FSLConfig,
                 matrices: Optional[DependencyMatrixSet] = None):
        if cfg.method == "dm-additive" and matrices is None:
            raise ValueError("dm-additive requires a dependency matrix set")
        self.space = space
        self.cfg = cfg
        self.matrices = matrices
        self.g = negative_sampling_vector(space, noise_distribution(space.vocab))

    def infer(self, context: FewShotContext,
              diagnostics: Optional[list[ContextWordRecord]] = None) -> np.ndarray:
        return _infer(context, self.space, self.cfg, self.cfg.method,
                      self.matrices, self.g, diagnostics)
