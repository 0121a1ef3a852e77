"""Rank- and correlation-based evaluation of few-shot inference.

Three protocols: definition sentences scored by the rank of the gold vector
(MRR, median rank); chimera trials scored by per-item Spearman between model
cosines and human ratings over probe words, averaged over items; rare-word
contexts scored by across-item Spearman per random draw of context sentences,
averaged over draws.

Dataset files are UTF-8 TSV; referenced sentence files are CoNLL-U with the
rare-word slot spelled "___".  Relative paths resolve against the TSV's
directory.
"""

from __future__ import annotations

import hashlib
import statistics
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

import numpy as np
import scipy.stats

from .fewshot import (
    EmptyContextError,
    FewShotContext,
    FSLConfig,
    Inferencer,
    TARGET_PLACEHOLDER,
)
from .corpus import load_conllu
from .spaces import DependencyMatrixSet, EmbeddingSpace, cosine, rank_of_gold


class EvaluationError(ValueError):
    """Protocol could not produce any metric (every item skipped)."""


class DatasetError(ValueError):
    """Malformed dataset file; message carries path and line number."""


@dataclass(frozen=True)
class DNItem:
    word: str
    definition: FewShotContext

    def __post_init__(self):
        if len(self.definition.sentences) != 1:
            raise ValueError("definition must contain exactly one sentence")


@dataclass(frozen=True)
class ChimeraItem:
    id: str
    context: FewShotContext
    probes: tuple[str, ...]
    human_scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.probes) != len(self.human_scores) or len(self.probes) < 2:
            raise ValueError("need one score per probe and at least two probes")
        if len(self.context.sentences) > 6:
            raise ValueError("at most 6 context sentences allowed")


@dataclass(frozen=True)
class CRWItem:
    rare: str
    frequent: str
    human_score: float
    context: FewShotContext


@dataclass
class EvalReport:
    task: str
    metrics: dict[str, float]
    skipped: list[tuple[str, str]] = field(default_factory=list)
    deviations: list[str] = field(default_factory=list)

    def __post_init__(self):
        for key, value in self.metrics.items():
            if not np.isfinite(value):
                raise ValueError(f"metric {key} is not finite: {value}")


# --- statistics -------------------------------------------------------------------

def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho (Pearson over mid-ranks, ties averaged)."""
    if len(xs) != len(ys):
        raise ValueError("score lists differ in length")
    if len(xs) < 2:
        raise ValueError("need at least two score pairs")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = scipy.stats.spearmanr(xs, ys).statistic
    if not np.isfinite(rho):
        raise ValueError("Spearman undefined (zero rank variance)")
    return float(rho)


def mrr(ranks: Sequence[int]) -> float:
    """Mean of reciprocal ranks."""
    if not ranks:
        raise ValueError("empty rank list")
    return float(np.mean(1.0 / np.asarray(ranks, dtype=np.float64)))


def median_rank(ranks: Sequence[int]):
    """Middle of the sorted ranks; mean of the two middle values for even counts."""
    if not ranks:
        raise ValueError("empty rank list")
    return statistics.median(ranks)


# --- protocols ----------------------------------------------------------------------

def eval_dn(space: EmbeddingSpace, cfg: FSLConfig, items: Sequence[DNItem],
            matrices: Optional[DependencyMatrixSet] = None) -> EvalReport:
    """Infer each definition, rank the gold vector, aggregate MRR and median rank."""
    inferencer = Inferencer(space, cfg, matrices)
    ranks: list[int] = []
    skipped: list[tuple[str, str]] = []
    for item in items:
        if item.word not in space.vocab:
            skipped.append((item.word, "gold word out of vocabulary"))
            continue
        try:
            inferred = inferencer.infer(item.definition)
            ranks.append(rank_of_gold(space, inferred, item.word))
        except (EmptyContextError, ValueError) as exc:
            skipped.append((item.word, str(exc)))
    if not ranks:
        raise EvaluationError("every definition item was skipped")
    return EvalReport("DN", {"MRR": mrr(ranks), "median_rank": float(median_rank(ranks))},
                      skipped)


def eval_chimera(space: EmbeddingSpace, cfg: FSLConfig, items: Sequence[ChimeraItem],
                 trial_sizes: Sequence[int] = (2, 4, 6),
                 matrices: Optional[DependencyMatrixSet] = None) -> EvalReport:
    """Per trial size, infer from the first sentences and average per-item Spearman."""
    if any(not 1 <= s <= 6 for s in trial_sizes):
        raise ValueError("trial sizes must lie in 1..6")
    inferencer = Inferencer(space, cfg, matrices)
    metrics: dict[str, float] = {}
    skipped: list[tuple[str, str]] = []
    for size in trial_sizes:
        rhos: list[float] = []
        for item in items:
            prefix = item.context.subset(range(min(size, len(item.context.sentences))))
            sims: list[float] = []
            scores: list[float] = []
            try:
                inferred = inferencer.infer(prefix)
                for probe, score in zip(item.probes, item.human_scores):
                    if probe in space.vocab:
                        sims.append(cosine(inferred, space.vector(probe)))
                        scores.append(score)
                if len(sims) < 2:
                    skipped.append((f"{item.id}:L{size}", "fewer than 2 in-vocabulary probes"))
                    continue
                rhos.append(spearman(sims, scores))
            except (EmptyContextError, ValueError) as exc:
                skipped.append((f"{item.id}:L{size}", str(exc)))
        if rhos:
            metrics[f"L{size}"] = float(np.mean(rhos))
    if not metrics:
        raise EvaluationError("every chimera item was skipped at every trial size")
    return EvalReport("Chimera", metrics, skipped)


def _item_rng(seed: int, rare: str, size: int, draw: int) -> np.random.Generator:
    """Generator derived from (seed, item, size, draw); independent of loop order."""
    digest = hashlib.sha256(rare.encode("utf-8")).digest()
    item_key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([seed, size, draw, item_key]))


def eval_crw(space: EmbeddingSpace, cfg: FSLConfig, items: Sequence[CRWItem],
             sizes: Sequence[int] = (1, 2, 4, 8, 16), selections: int = 10,
             seed: int = 0, matrices: Optional[DependencyMatrixSet] = None) -> EvalReport:
    """Across-item Spearman per seeded sentence draw, averaged over draws per size."""
    if any(s < 1 for s in sizes):
        raise ValueError("sizes must be positive")
    if selections < 1:
        raise ValueError("selections must be >= 1")
    inferencer = Inferencer(space, cfg, matrices)
    metrics: dict[str, float] = {}
    skipped: list[tuple[str, str]] = []
    deviations: list[str] = []
    seen_skip: set[tuple[str, str]] = set()
    seen_dev: set[str] = set()

    usable_items = []
    for item in items:
        if item.frequent not in space.vocab:
            skipped.append((item.rare, "frequent word out of vocabulary"))
            continue
        usable_items.append(item)

    for size in sizes:
        draw_rhos: list[float] = []
        for draw in range(selections):
            sims: list[float] = []
            scores: list[float] = []
            for item in usable_items:
                available = len(item.context.sentences)
                if available < size:
                    note = f"{item.rare}: only {available} sentences for size {size}"
                    if note not in seen_dev:
                        seen_dev.add(note)
                        deviations.append(note)
                    chosen = item.context
                else:
                    rng = _item_rng(seed, item.rare, size, draw)
                    idx = sorted(rng.choice(available, size=size, replace=False).tolist())
                    chosen = item.context.subset(idx)
                try:
                    inferred = inferencer.infer(chosen)
                    sims.append(cosine(inferred, space.vector(item.frequent)))
                    scores.append(item.human_score)
                except (EmptyContextError, ValueError) as exc:
                    key = (f"{item.rare}@{size}", str(exc))
                    if key not in seen_skip:
                        seen_skip.add(key)
                        skipped.append(key)
            if len(sims) >= 2:
                try:
                    draw_rhos.append(spearman(sims, scores))
                except ValueError as exc:
                    key = (f"draw {draw}@{size}", str(exc))
                    if key not in seen_skip:
                        seen_skip.add(key)
                        skipped.append(key)
        if draw_rhos:
            metrics[f"spearman@{size}"] = float(np.mean(draw_rhos))
    if not metrics:
        raise EvaluationError("no CRW metric could be computed")
    return EvalReport("CRW", metrics, skipped, deviations)


# --- dataset files ----------------------------------------------------------------

def _read_tsv(path) -> list[tuple[int, list[str]]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            rows.append((lineno, line.split("\t")))
    return rows


def _load_context_file(path, target_form: str) -> FewShotContext:
    sentences = load_conllu(path)
    if len(sentences) != 1:
        raise DatasetError(f"{path}: expected one sentence, found {len(sentences)}")
    return FewShotContext.from_sentences(sentences, target_form)


def _load_sentence_dir(dirpath: Path, target_form: str) -> FewShotContext:
    """Read sent_1.conllu, sent_2.conllu, ... in numeric order, one sentence each."""
    files = sorted(dirpath.glob("sent_*.conllu"),
                   key=lambda p: int(p.stem.split("_")[1]))
    if not files:
        raise DatasetError(f"{dirpath}: no sent_*.conllu files")
    sentences = []
    for file in files:
        sentences.extend(load_conllu(file))
    return FewShotContext.from_sentences(sentences, target_form)


def load_dn_dataset(path, target_form: str = TARGET_PLACEHOLDER) -> list[DNItem]:
    """TSV rows "word<TAB>conllu-path"; each file holds one slotted sentence."""
    base = Path(path).parent
    items = []
    for lineno, cols in _read_tsv(path):
        if len(cols) != 2:
            raise DatasetError(f"{path}: line {lineno}: expected 'word<TAB>file', "
                               f"got {len(cols)} columns")
        word, rel = cols
        try:
            items.append(DNItem(word, _load_context_file(base / rel, target_form)))
        except ValueError as exc:
            raise DatasetError(f"{path}: line {lineno}: {exc}") from None
    return items


def load_chimera_dataset(path, target_form: str = TARGET_PLACEHOLDER) -> list[ChimeraItem]:
    """TSV rows "id<TAB>probes<TAB>scores<TAB>dir" with comma-separated lists."""
    base = Path(path).parent
    items = []
    for lineno, cols in _read_tsv(path):
        if len(cols) != 4:
            raise DatasetError(f"{path}: line {lineno}: expected "
                               f"'id<TAB>probes<TAB>scores<TAB>dir', got {len(cols)} columns")
        trial_id, probes_col, scores_col, rel = cols
        probes = tuple(p for p in probes_col.split(",") if p)
        try:
            scores = tuple(float(s) for s in scores_col.split(",") if s)
            context = _load_sentence_dir(base / rel, target_form)
            items.append(ChimeraItem(trial_id, context, probes, scores))
        except ValueError as exc:
            raise DatasetError(f"{path}: line {lineno}: {exc}") from None
    return items


def load_crw_dataset(path, target_form: str = TARGET_PLACEHOLDER) -> list[CRWItem]:
    """TSV rows "rare<TAB>frequent<TAB>score<TAB>dir"."""
    base = Path(path).parent
    items = []
    for lineno, cols in _read_tsv(path):
        if len(cols) != 4:
            raise DatasetError(f"{path}: line {lineno}: expected "
                               f"'rare<TAB>frequent<TAB>score<TAB>dir', got {len(cols)} columns")
        rare, frequent, score_col, rel = cols
        try:
            score = float(score_col)
            context = _load_sentence_dir(base / rel, target_form)
            items.append(CRWItem(rare, frequent, score, context))
        except ValueError as exc:
            raise DatasetError(f"{path}: line {lineno}: {exc}") from None
    return items


# --- report output -------------------------------------------------------------------

def write_report_machine(report: EvalReport, stream: TextIO) -> None:
    """Line-oriented "metric<TAB>value" plus skipped/deviation counts."""
    stream.write(f"task\t{report.task}\n")
    for key, value in report.metrics.items():
        stream.write(f"{key}\t{value:.12g}\n")
    stream.write(f"skipped\t{len(report.skipped)}\n")
    if report.deviations:
        stream.write(f"deviations\t{len(report.deviations)}\n")


def write_report_human(report: EvalReport, stream: TextIO) -> None:
    """Aligned metric table with skip reasons spelled out."""
    stream.write(f"{report.task} evaluation\n")
    width = max((len(k) for k in report.metrics), default=0)
    for key, value in report.metrics.items():
        stream.write(f"  {key:<{width}}  {value:.4f}\n")
    stream.write(f"  skipped items: {len(report.skipped)}\n")
    for item, reason in report.skipped:
        stream.write(f"    {item}: {reason}\n")
    for note in report.deviations:
        stream.write(f"  note: {note}\n")
