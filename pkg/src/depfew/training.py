"""Negative-sampling trainers for the three background models.

All three models share one logistic loss: -log sigma(u_pos) - sum log
sigma(-u_neg), where u is a dot product for the Skip-Gram variants and the
bilinear form v_t . T_d . v_c for the dependency-matrix model.  Updates use
per-element Adagrad accumulated over mini-batches of tuples.

Single-threaded training is a pure function of (corpus, vocabulary, config);
with threads > 1 workers share parameter rows without locking, so results
are usable but not bit-reproducible.
"""

from __future__ import annotations

import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np
from scipy.special import expit

from .corpus import (
    NoiseDistribution,
    ParsedSentence,
    Vocabulary,
    build_context_vocabulary,
    extract_dependency_tuples,
    extract_window_tuples,
    invert_label,
    noise_distribution,
)
from .spaces import DependencyMatrixSet, EmbeddingSpace

MODEL_KINDS = ("skipgram", "dep-skipgram", "dep-matrix")


class TrainingError(RuntimeError):
    """Numeric failure during training (divergence, non-finite loss/gradient)."""


@dataclass
class TrainerConfig:
    model_kind: str = "skipgram"
    dim: int = 100
    negatives: int = 15
    batch_size: int = 5
    learning_rate: float = 0.025
    window: int = 5
    subsample_tau: float = 1e-6
    epochs: int = 5
    seed: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.model_kind!r}")
        if self.dim < 1 or self.batch_size < 1 or self.negatives < 0:
            raise ValueError("dim and batch_size must be >= 1, negatives >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.window < 1 or self.epochs < 0 or self.threads < 1:
            raise ValueError("window >= 1, epochs >= 0, threads >= 1 required")


@dataclass
class AdagradState:
    """Per-element sum of squared gradients plus the sqrt stabilizer."""

    accumulators: np.ndarray
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, shape, epsilon: float = 1e-8) -> "AdagradState":
        return cls(np.zeros(shape, dtype=np.float64), epsilon)


def adagrad_update(param: np.ndarray, grad: np.ndarray, state: AdagradState,
                   lr: float, rows: Optional[np.ndarray] = None) -> np.ndarray:
    """In-place Adagrad step; with ``rows``, updates only those (unique) rows."""
    grad = np.asarray(grad)
    if not np.isfinite(grad).all():
        raise TrainingError("non-finite gradient")
    if rows is None:
        state.accumulators += np.square(grad, dtype=np.float64)
        param -= lr * grad / (np.sqrt(state.accumulators) + state.epsilon)
    else:
        acc = state.accumulators[rows] + np.square(grad, dtype=np.float64)
        state.accumulators[rows] = acc
        param[rows] = param[rows] - lr * grad / (np.sqrt(acc) + state.epsilon)
    return param


class AliasTable:
    """Vose alias table for O(1) draws from a fixed categorical distribution."""

    def __init__(self, probabilities: np.ndarray):
        p = np.asarray(probabilities, dtype=np.float64)
        n = len(p)
        if n == 0:
            raise ValueError("empty distribution")
        self.prob = np.ones(n)
        self.alias = np.arange(n, dtype=np.int64)
        scaled = p * n
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = rng.integers(0, len(self.prob), size=size)
        keep = rng.random(size) < self.prob[idx]
        return np.where(keep, idx, self.alias[idx])


def sample_negatives(noise: NoiseDistribution, k: int, rng: np.random.Generator) -> np.ndarray:
    """k i.i.d. context ids from the noise distribution."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    table = getattr(noise, "_alias_table", None)
    if table is None:
        table = AliasTable(noise.probabilities)
        noise._alias_table = table
    return table.sample(rng, k)


# --- loss and gradients -----------------------------------------------------------

def dm_score(v_t: np.ndarray, T_d: np.ndarray, v_c: np.ndarray) -> float:
    """Bilinear score v_t . T_d . v_c."""
    v_t = np.asarray(v_t)
    v_c = np.asarray(v_c)
    T_d = np.asarray(T_d)
    if v_t.ndim != 1 or v_c.ndim != 1 or T_d.shape != (v_t.shape[0], v_c.shape[0]):
        raise ValueError(f"shape mismatch: {v_t.shape}, {T_d.shape}, {v_c.shape}")
    return float(v_t @ T_d @ v_c)


def batch_loss_and_grads(t_vecs: np.ndarray, c_vecs: np.ndarray, neg_vecs: np.ndarray,
                         matrices: Optional[np.ndarray] = None):
    """Loss and gradients for a batch of tuples.

    Shapes: t_vecs (B, D), c_vecs (B, D), neg_vecs (B, K, D) and, for the
    dependency-matrix model, matrices (B, D, D).  Returns per-tuple losses
    (B,) and gradients (d_t, d_c, d_negs, d_T) matching the input shapes
    (d_T is None for the dot-product models).
    """
    if matrices is None:
        u_pos = np.einsum("bd,bd->b", t_vecs, c_vecs)
        y = t_vecs
    else:
        y = np.einsum("bij,bi->bj", matrices, t_vecs)  # T^t v_t
        u_pos = np.einsum("bd,bd->b", y, c_vecs)
    u_neg = np.einsum("bd,bkd->bk", y, neg_vecs)

    g_pos = expit(u_pos) - 1.0
    g_neg = expit(u_neg)
    losses = np.logaddexp(0.0, -u_pos) + np.logaddexp(0.0, u_neg).sum(axis=1)

    # z = dL/du_pos * v_c + sum_k dL/du_k * v_k, the shared co-factor
    z = g_pos[:, None] * c_vecs + np.einsum("bk,bkd->bd", g_neg, neg_vecs)
    if matrices is None:
        d_t = z
        d_T = None
    else:
        d_t = np.einsum("bij,bj->bi", matrices, z)
        d_T = np.einsum("bi,bj->bij", t_vecs, z)
    d_c = g_pos[:, None] * y
    d_negs = g_neg[..., None] * y[:, None, :]
    return losses, (d_t, d_c, d_negs, d_T)


def tuple_loss_and_grads(v_t: np.ndarray, v_c: np.ndarray, neg_vecs: np.ndarray,
                         T_d: Optional[np.ndarray] = None):
    """Single-tuple view of :func:`batch_loss_and_grads`.

    ``neg_vecs`` holds one row per negative sample; pass ``T_d`` for the
    dependency-matrix model.  Returns (loss, (d_t, d_c, d_negs, d_T)).
    """
    neg_vecs = np.asarray(neg_vecs)
    if neg_vecs.size == 0:
        neg_vecs = neg_vecs.reshape(0, len(v_t))
    else:
        neg_vecs = np.atleast_2d(neg_vecs)
    losses, (d_t, d_c, d_negs, d_T) = batch_loss_and_grads(
        np.asarray(v_t)[None], np.asarray(v_c)[None], neg_vecs[None],
        None if T_d is None else np.asarray(T_d)[None])
    return float(losses[0]), (d_t[0], d_c[0], d_negs[0], None if d_T is None else d_T[0])


# --- training loop ------------------------------------------------------------------

@dataclass
class TrainResult:
    space: EmbeddingSpace
    matrices: Optional[DependencyMatrixSet]
    epoch_losses: list[float] = field(default_factory=list)


class _Model:
    """Mutable parameter tables shared by the workers of one training run."""

    def __init__(self, vocab: Vocabulary, config: TrainerConfig,
                 context_vocab: Optional[Vocabulary], labels: list[str],
                 rng: np.random.Generator):
        dim = config.dim
        bound = 0.5 / dim
        self.vocab = vocab
        self.context_vocab = context_vocab
        self.labels = labels
        self.label_index = {lab: i for i, lab in enumerate(labels)}
        self.targets = rng.uniform(-bound, bound, (len(vocab), dim)).astype(np.float32)
        if context_vocab is not None:
            self.contexts = rng.uniform(-bound, bound, (len(context_vocab), dim)).astype(np.float32)
        else:
            self.contexts = self.targets  # dep-matrix: one embedding per word
        if config.model_kind == "dep-matrix":
            noise = rng.uniform(-0.01, 0.01, (len(labels), dim, dim))
            self.matrices = (np.eye(dim)[None, :, :] + noise).astype(np.float32)
        else:
            self.matrices = None
        self.target_state = AdagradState.zeros(self.targets.shape)
        self.context_state = (AdagradState.zeros(self.contexts.shape)
                              if self.contexts is not self.targets else self.target_state)
        self.matrix_state = (AdagradState.zeros(self.matrices.shape)
                             if self.matrices is not None else None)


def _scatter_rows(ids: np.ndarray, grads: np.ndarray):
    """Collapse duplicate ids, summing their gradients."""
    uniq, inv = np.unique(ids, return_inverse=True)
    buf = np.zeros((len(uniq),) + grads.shape[1:], dtype=grads.dtype)
    np.add.at(buf, inv, grads)
    return uniq, buf


def _collect_labels(sentences: Sequence[ParsedSentence], vocab: Vocabulary) -> list[str]:
    labels = set()
    for sent in sentences:
        for head, dep, label in sent.arcs:
            if sent.tokens[head - 1].form in vocab and sent.tokens[dep - 1].form in vocab:
                labels.add(label)
                labels.add(invert_label(label))
    return sorted(labels)


def _epoch_tuples(sentences: Sequence[ParsedSentence], order: np.ndarray,
                  model: _Model, config: TrainerConfig, keep_probs: np.ndarray,
                  rng: np.random.Generator):
    """Extract one epoch's tuples with stochastic subsampling applied."""
    targets: list[int] = []
    contexts: list[int] = []
    rel_ids: list[int] = []
    vocab = model.vocab
    dep_mode = config.model_kind in ("dep-skipgram", "dep-matrix")
    for si in order:
        sent = sentences[si]
        draws = rng.random(len(sent.tokens))
        keep = []
        for tok, draw in zip(sent.tokens, draws):
            wid = vocab.lookup(tok.form)
            keep.append(wid is not None and draw < keep_probs[wid])
        if dep_mode:
            tuples = extract_dependency_tuples(sent, vocab, config.model_kind,
                                               context_vocab=model.context_vocab, keep=keep)
        else:
            tuples = extract_window_tuples(sent, config.window, vocab, keep=keep)
        for tup in tuples:
            targets.append(tup.target)
            contexts.append(tup.context)
            if model.matrices is not None:
                rel_ids.append(model.label_index[tup.relation])
    t_arr = np.asarray(targets, dtype=np.int64)
    c_arr = np.asarray(contexts, dtype=np.int64)
    r_arr = np.asarray(rel_ids, dtype=np.int64) if model.matrices is not None else None
    return t_arr, c_arr, r_arr


def _train_tuples(model: _Model, config: TrainerConfig, t_arr: np.ndarray,
                  c_arr: np.ndarray, r_arr: Optional[np.ndarray],
                  negs: np.ndarray) -> float:
    """Run mini-batch Adagrad steps over one worker's tuples; returns summed loss."""
    lr = config.learning_rate
    total_loss = 0.0
    n = len(t_arr)
    for start in range(0, n, config.batch_size):
        end = min(start + config.batch_size, n)
        t_ids = t_arr[start:end]
        c_ids = c_arr[start:end]
        n_ids = negs[start:end]
        mats = model.matrices[r_arr[start:end]] if r_arr is not None else None
        losses, (d_t, d_c, d_negs, d_T) = batch_loss_and_grads(
            model.targets[t_ids], model.contexts[c_ids], model.contexts[n_ids], mats)
        batch_loss = float(losses.sum())
        if not np.isfinite(batch_loss):
            raise TrainingError(f"non-finite loss at tuples {start}..{end}")
        total_loss += batch_loss

        if model.contexts is model.targets:
            ids = np.concatenate([t_ids, c_ids, n_ids.ravel()])
            grads = np.concatenate([d_t, d_c, d_negs.reshape(-1, d_t.shape[1])])
            rows, buf = _scatter_rows(ids, grads)
            adagrad_update(model.targets, buf, model.target_state, lr, rows=rows)
        else:
            rows, buf = _scatter_rows(t_ids, d_t)
            adagrad_update(model.targets, buf, model.target_state, lr, rows=rows)
            ids = np.concatenate([c_ids, n_ids.ravel()])
            grads = np.concatenate([d_c, d_negs.reshape(-1, d_t.shape[1])])
            rows, buf = _scatter_rows(ids, grads)
            adagrad_update(model.contexts, buf, model.context_state, lr, rows=rows)
        if d_T is not None:
            labs, buf = _scatter_rows(r_arr[start:end], d_T)
            adagrad_update(model.matrices, buf, model.matrix_state, lr, rows=labs)
    return total_loss


def train(sentences: Sequence[ParsedSentence], vocab: Vocabulary,
          config: TrainerConfig, progress: Optional[TextIO] = sys.stderr) -> TrainResult:
    """Train one background model over the corpus.

    Returns the published space (and the matrix set for dep-matrix).  With
    threads = 1 the result is a deterministic function of the inputs.
    """
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    if not sentences:
        raise ValueError("empty corpus")

    rng = np.random.default_rng(config.seed)
    if config.model_kind == "skipgram":
        context_vocab = vocab
    elif config.model_kind == "dep-skipgram":
        context_vocab = build_context_vocabulary(sentences, vocab)
        if len(context_vocab) == 0:
            raise ValueError("no dependency contexts found in corpus")
    else:
        context_vocab = None

    labels = _collect_labels(sentences, vocab) if config.model_kind == "dep-matrix" else []
    model = _Model(vocab, config, context_vocab, labels, rng)

    noise = noise_distribution(context_vocab if context_vocab is not None else vocab)
    table = AliasTable(noise.probabilities)
    rel = vocab.rel_freqs
    keep_probs = np.minimum(1.0, np.sqrt(config.subsample_tau / rel))

    epoch_losses: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(sentences))
        started = time.perf_counter()
        if config.threads == 1:
            t_arr, c_arr, r_arr = _epoch_tuples(sentences, order, model, config, keep_probs, rng)
            negs = table.sample(rng, (len(t_arr), config.negatives))
            loss = _train_tuples(model, config, t_arr, c_arr, r_arr, negs)
            count = len(t_arr)
        else:
            chunks = np.array_split(order, config.threads)
            child_rngs = rng.spawn(config.threads)
            results: list[tuple[float, int]] = [(0.0, 0)] * config.threads
            errors: list[BaseException] = []

            def work(w: int):
                try:
                    t_arr, c_arr, r_arr = _epoch_tuples(
                        sentences, chunks[w], model, config, keep_probs, child_rngs[w])
                    negs = table.sample(child_rngs[w], (len(t_arr), config.negatives))
                    loss = _train_tuples(model, config, t_arr, c_arr, r_arr, negs)
                    results[w] = (loss, len(t_arr))
                except BaseException as exc:  # surfaced after join
                    errors.append(exc)

            workers = [threading.Thread(target=work, args=(w,)) for w in range(config.threads)]
            for thread in workers:
                thread.start()
            for thread in workers:
                thread.join()
            if errors:
                raise errors[0]
            loss = sum(r[0] for r in results)
            count = sum(r[1] for r in results)
        elapsed = time.perf_counter() - started
        mean_loss = loss / count if count else 0.0
        epoch_losses.append(mean_loss)
        if progress is not None:
            rate = count / elapsed if elapsed > 0 else 0.0
            print(f"epoch={epoch + 1} tuples={count} tuples_per_sec={rate:.0f} "
                  f"mean_loss={mean_loss:.6f}", file=progress)

    if config.model_kind == "dep-matrix":
        space = EmbeddingSpace(vocab, model.targets)
        matrices = DependencyMatrixSet(labels, model.matrices)
    else:
        space = EmbeddingSpace(vocab, model.targets, context_vocab=context_vocab,
                               context_vectors=model.contexts)
        matrices = None
    return TrainResult(space, matrices, epoch_losses)
