"""CoNLL-U corpora: parsing, vocabularies, sampling weights and tuple extraction.

Everything here is pure and deterministic; the training loop layers its
stochastic subsampling on top via the optional ``keep`` masks.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, TextIO

import numpy as np

INVERSE_SUFFIX = "-1"

WINDOW_RELATION = None  # relation value of tuples coming from window extraction


class ConlluError(ValueError):
    """Malformed CoNLL-U input; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def invert_label(label: str) -> str:
    """Directed label for traversing an arc against its head->dependent direction."""
    if label.endswith(INVERSE_SUFFIX):
        return label[: -len(INVERSE_SUFFIX)]
    return label + INVERSE_SUFFIX


@dataclass(frozen=True)
class Token:
    """One syntactic word: 1-based index, surface form, governor index (0 = root), label."""

    index: int
    form: str
    head: int
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0 or self.head == self.index:
            raise ValueError(f"bad head {self.head} for token {self.index}")
        if not self.form:
            raise ValueError("empty token form")


@dataclass(frozen=True)
class ParsedSentence:
    """Tokens of one sentence plus the directed labeled arcs derived from them."""

    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def arcs(self) -> list[tuple[int, int, str]]:
        """(head_index, dependent_index, deprel) for every non-root token."""
        return [(t.head, t.index, t.deprel) for t in self.tokens if t.head != 0]

    def adjacency(self) -> dict[int, list[int]]:
        """Undirected neighbor lists over 1-based token indices, sorted ascending."""
        nbrs: dict[int, list[int]] = {t.index: [] for t in self.tokens}
        for head, dep, _ in self.arcs:
            nbrs[head].append(dep)
            nbrs[dep].append(head)
        for k in nbrs:
            nbrs[k].sort()
        return nbrs


class TrainingTuple(NamedTuple):
    target: int
    context: int
    relation: Optional[str]


@dataclass
class NoiseDistribution:
    """Unigram noise probabilities aligned with a vocabulary (counts ** 0.75, normalized)."""

    probabilities: np.ndarray

    def __len__(self) -> int:
        return len(self.probabilities)


class Vocabulary:
    """Word inventory ordered by descending count, ties broken lexicographically.

    ``lowercase`` records the normalization applied when the vocabulary was
    built; ``lookup`` applies the same normalization so callers never have to
    remember the policy.
    """

    def __init__(self, words: Sequence[str], counts: Sequence[int],
                 min_count: int = 1, lowercase: bool = True):
        self.words = list(words)
        self.counts = np.asarray(counts, dtype=np.int64)
        if len(self.words) != len(self.counts):
            raise ValueError("words and counts length mismatch")
        self.total = int(self.counts.sum())
        self.min_count = min_count
        self.lowercase = lowercase
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, form: str) -> bool:
        return self.lookup(form) is not None

    def __eq__(self, other) -> bool:
        return (isinstance(other, Vocabulary)
                and self.words == other.words
                and np.array_equal(self.counts, other.counts))

    def normalize(self, form: str) -> str:
        return form.lower() if self.lowercase else form

    def lookup(self, form: str) -> Optional[int]:
        """Id of the (normalized) form, or None if out of vocabulary."""
        return self._index.get(self.normalize(form))

    def id_of(self, form: str) -> int:
        idx = self.lookup(form)
        if idx is None:
            raise KeyError(f"{form!r} not in vocabulary")
        return idx

    def word_of(self, idx: int) -> str:
        return self.words[idx]

    def rel_freq(self, idx: int) -> float:
        return float(self.counts[idx]) / self.total

    @property
    def rel_freqs(self) -> np.ndarray:
        return self.counts / float(self.total)


def build_vocabulary(sentences: Iterable[ParsedSentence], min_count: int = 1,
                     lowercase: bool = True) -> Vocabulary:
    """Count token forms and keep those with count >= min_count."""
    if min_count < 1:
        raise ValueError("min_count must be positive")
    counter: Counter[str] = Counter()
    for sent in sentences:
        for tok in sent.tokens:
            counter[tok.form.lower() if lowercase else tok.form] += 1
    kept = [(w, c) for w, c in counter.items() if c >= min_count]
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in kept], [c for _, c in kept],
                      min_count=min_count, lowercase=lowercase)


def subsample_weight(rel_freq: float, tau: float) -> float:
    """Frequency down-weighting min(1, sqrt(tau / f))."""
    if rel_freq <= 0:
        raise ValueError(f"relative frequency must be positive, got {rel_freq}")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return min(1.0, math.sqrt(tau / rel_freq))


def window_weight(m: int, n: int) -> float:
    """Linear decay max(0, (n - m + 1) / n) of a context at surface distance m."""
    if m < 1:
        raise ValueError(f"surface distance must be >= 1, got {m}")
    if n < 1:
        raise ValueError(f"window size must be >= 1, got {n}")
    return max(0.0, (n - m + 1) / n)


def noise_distribution(vocab: Vocabulary) -> NoiseDistribution:
    """Unigram distribution raised to 0.75 and renormalized."""
    if len(vocab) == 0:
        raise ValueError("cannot build a noise distribution over an empty vocabulary")
    powered = np.asarray(vocab.counts, dtype=np.float64) ** 0.75
    return NoiseDistribution(powered / powered.sum())


def extract_window_tuples(sentence: ParsedSentence, n: int, vocab: Vocabulary,
                          keep: Optional[Sequence[bool]] = None) -> list[TrainingTuple]:
    """Ordered (target, context) pairs within surface distance n.

    Distances are measured on the original token positions; out-of-vocabulary
    tokens (and tokens masked out by ``keep``) are skipped but still occupy
    their positions.
    """
    ids = [vocab.lookup(tok.form) for tok in sentence.tokens]
    if keep is not None:
        ids = [i if k else None for i, k in zip(ids, keep)]
    out: list[TrainingTuple] = []
    size = len(ids)
    for i in range(size):
        if ids[i] is None:
            continue
        for j in range(max(0, i - n), min(size, i + n + 1)):
            if j == i or ids[j] is None:
                continue
            out.append(TrainingTuple(ids[i], ids[j], WINDOW_RELATION))
    return out


def dependency_context(form: str, label: str) -> str:
    """Context identity used by the dependency Skip-Gram model."""
    return f"{form}:{label}"


def extract_dependency_tuples(sentence: ParsedSentence, vocab: Vocabulary, mode: str,
                              context_vocab: Optional[Vocabulary] = None,
                              keep: Optional[Sequence[bool]] = None) -> list[TrainingTuple]:
    """Both-direction tuples for every arc whose endpoints are in vocabulary.

    An arc (h, d, label) yields (h, d, label) and (d, h, label-1).  In
    ``dep-matrix`` mode contexts are plain word ids; in ``dep-skipgram`` mode
    contexts are "form:label" ids in ``context_vocab``.
    """
    if mode not in ("dep-skipgram", "dep-matrix"):
        raise ValueError(f"unknown dependency extraction mode {mode!r}")
    if mode == "dep-skipgram" and context_vocab is None:
        raise ValueError("dep-skipgram extraction requires a context vocabulary")
    ids = [vocab.lookup(tok.form) for tok in sentence.tokens]
    if keep is not None:
        ids = [i if k else None for i, k in zip(ids, keep)]
    out: list[TrainingTuple] = []
    for head, dep, label in sentence.arcs:
        hid, did = ids[head - 1], ids[dep - 1]
        if hid is None or did is None:
            continue
        for tid, cid, rel in ((hid, did, label), (did, hid, invert_label(label))):
            if mode == "dep-matrix":
                out.append(TrainingTuple(tid, cid, rel))
            else:
                ctx = context_vocab.lookup(dependency_context(vocab.word_of(cid), rel))
                if ctx is not None:
                    out.append(TrainingTuple(tid, ctx, rel))
    return out


def build_context_vocabulary(sentences: Iterable[ParsedSentence],
                             vocab: Vocabulary) -> Vocabulary:
    """Vocabulary of "form:label" context strings for dependency Skip-Gram."""
    counter: Counter[str] = Counter()
    for sent in sentences:
        ids = [vocab.lookup(tok.form) for tok in sent.tokens]
        for head, dep, label in sent.arcs:
            hid, did = ids[head - 1], ids[dep - 1]
            if hid is None or did is None:
                continue
            counter[dependency_context(vocab.word_of(did), label)] += 1
            counter[dependency_context(vocab.word_of(hid), invert_label(label))] += 1
    kept = sorted(counter.items(), key=lambda wc: (-wc[1], wc[0]))
    return Vocabulary([w for w, _ in kept], [c for _, c in kept],
                      min_count=1, lowercase=False)


# --- CoNLL-U reading and writing ---------------------------------------------

def parse_conllu(source: str | Iterable[str]) -> list[ParsedSentence]:
    """Parse CoNLL-U text into sentences.

    Accepts a string or any iterable of lines.  Token lines need at least 8
    tab-separated columns (index, form, ..., head, deprel in columns 1, 2, 7,
    8); comment lines start with '#'; multiword-token ranges (ids with '-')
    and empty nodes (ids with '.') are skipped; a blank line closes a
    sentence.  Raises ConlluError with the offending line number.
    """
    if isinstance(source, str):
        source = source.splitlines()

    sentences: list[ParsedSentence] = []
    tokens: list[Token] = []
    token_lines: list[int] = []

    def flush(at_line: int):
        if not tokens:
            return
        n = len(tokens)
        for tok, lineno in zip(tokens, token_lines):
            if tok.head > n:
                raise ConlluError(f"head {tok.head} references a nonexistent token", lineno)
        sentences.append(ParsedSentence(tuple(tokens)))
        tokens.clear()
        token_lines.clear()

    lineno = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n\r")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 8:
            raise ConlluError(f"expected at least 8 columns, got {len(cols)}", lineno)
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword range / empty node
        try:
            index = int(tok_id)
        except ValueError:
            raise ConlluError(f"non-integer token index {tok_id!r}", lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"non-integer head {cols[6]!r}", lineno) from None
        if index != len(tokens) + 1:
            raise ConlluError(f"token index {index} out of sequence", lineno)
        if not cols[1]:
            raise ConlluError("empty token form", lineno)
        if head == index or head < 0:
            raise ConlluError(f"bad head {head} for token {index}", lineno)
        tokens.append(Token(index=index, form=cols[1], head=head, deprel=cols[7]))
        token_lines.append(lineno)
    flush(lineno + 1)
    return sentences


def load_conllu(path) -> list[ParsedSentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh)


def write_conllu(sentences: Iterable[ParsedSentence], stream: TextIO) -> None:
    """Write sentences in CoNLL-U; unused columns are emitted as '_'."""
    for sent in sentences:
        for tok in sent.tokens:
            stream.write(f"{tok.index}\t{tok.form}\t_\t_\t_\t_\t{tok.head}\t{tok.deprel}\t_\t_\n")
        stream.write("\n")


def conllu_to_string(sentences: Iterable[ParsedSentence]) -> str:
    buf = io.StringIO()
    write_conllu(sentences, buf)
    return buf.getvalue()


def save_conllu(sentences: Iterable[ParsedSentence], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_conllu(sentences, fh)


# --- vocabulary files ---------------------------------------------------------

def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Write "word<TAB>count" lines under a "#total N" header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#total {vocab.total}\n")
        for word, count in zip(vocab.words, vocab.counts):
            fh.write(f"{word}\t{count}\n")


def load_vocabulary(path, lowercase: bool = True) -> Vocabulary:
    words: list[str] = []
    counts: list[int] = []
    total = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#total"):
                total = int(line.split()[1])
                continue
            try:
                word, count = line.split("\t")
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: expected 'word<TAB>count'") from None
            words.append(word)
            counts.append(int(count))
    vocab = Vocabulary(words, counts, min_count=min(counts, default=1), lowercase=lowercase)
    if total is not None and total != vocab.total:
        raise ValueError(f"{path}: header total {total} != sum of counts {vocab.total}")
    return vocab
