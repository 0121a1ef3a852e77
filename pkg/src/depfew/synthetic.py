"""Seeded miniature corpus for end-to-end checks of the full pipeline.

The vocabulary pairs each noun with a signature verb and adjective; fillers
live in their own sentences and act as ranking distractors only.  The
definition-shaped template surrounds the noun with stop words, places the
signature words far on the surface but one arc away, and plants a confound
(some other noun's signature verb) near the noun but four arcs away:

  position  form   arc          surface r (n=5)   dep weight
  1         the    advmod-> 6   1.0               1.5
  2         NOUN   nsubj->  6   (slot)
  3         that   obl->    6   1.0               1.5
  4         CONF   nmod->   5   0.8               1.25
  5         of     nmod->   3   0.6               1.33
  6         VERB   root         0.4               2.0
  7         ADJ    amod->   2   0.2               2.0

Window weighting alone favors the confound (0.8 vs 0.4 + 0.2 for the
signature pair); dependency weighting flips the order (1.25 * 0.8 = 1.0 vs
2 * 0.4 + 2 * 0.2 = 1.2).  Held-out definitions reuse this exact shape with
the noun masked, so distance-aware inference must beat plain addition.

Template B ("the ADJ NOUN VERB") reinforces the signatures for all three
background models; template C is five fillers in a small tree.  Everything
is driven by one seed; repeated calls are identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ParsedSentence, Token, save_conllu
from .evaluation import DNItem
from .fewshot import TARGET_PLACEHOLDER, FewShotContext, FSLConfig
from .training import TrainerConfig

# The corpus is tiny, so the web-scale subsampling threshold would discard
# nearly everything; 1e-3 keeps roughly half the content tokens.
MINIATURE_TAU = 1e-3


@dataclass(frozen=True)
class MiniatureSpec:
    pairs: int = 40
    fillers: int = 70
    sentences: int = 10000
    seed: int = 7

    def noun(self, i: int) -> str:
        return f"noun{i:02d}"

    def verb(self, i: int) -> str:
        return f"verb{i:02d}"

    def adjective(self, i: int) -> str:
        return f"adj{i:02d}"

    def filler(self, j: int) -> str:
        return f"filler{j:03d}"


def _template_a(noun: str, verb: str, adjective: str, confound: str) -> ParsedSentence:
    return ParsedSentence((
        Token(1, "the", 6, "advmod"),
        Token(2, noun, 6, "nsubj"),
        Token(3, "that", 6, "obl"),
        Token(4, confound, 5, "nmod"),
        Token(5, "of", 3, "nmod"),
        Token(6, verb, 0, "root"),
        Token(7, adjective, 2, "amod"),
    ))


def _template_b(noun: str, verb: str, adjective: str) -> ParsedSentence:
    return ParsedSentence((
        Token(1, "the", 3, "det"),
        Token(2, adjective, 3, "amod"),
        Token(3, noun, 4, "nsubj"),
        Token(4, verb, 0, "root"),
    ))


def _template_c(fillers: list[str]) -> ParsedSentence:
    f_a, f_b, f_c, f_d, f_e = fillers
    return ParsedSentence((
        Token(1, f_a, 3, "advmod"),
        Token(2, f_b, 3, "nsubj"),
        Token(3, f_c, 0, "root"),
        Token(4, f_d, 3, "obj"),
        Token(5, f_e, 4, "nmod"),
    ))


def generate_corpus(spec: MiniatureSpec = MiniatureSpec()) -> list[ParsedSentence]:
    """Training sentences: a seeded 40/30/30 mix of the three templates."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0]))
    sentences = []
    for _ in range(spec.sentences):
        i = int(rng.integers(spec.pairs))
        pick = rng.random()
        if pick < 0.4:
            confound = spec.verb(int(rng.integers(spec.pairs)))
            sentences.append(_template_a(spec.noun(i), spec.verb(i),
                                         spec.adjective(i), confound))
        elif pick < 0.7:
            sentences.append(_template_b(spec.noun(i), spec.verb(i), spec.adjective(i)))
        else:
            picks = [spec.filler(int(j)) for j in rng.integers(spec.fillers, size=5)]
            sentences.append(_template_c(picks))
    return sentences


def generate_dn_items(spec: MiniatureSpec = MiniatureSpec(),
                      per_noun: int = 1) -> list[DNItem]:
    """Held-out definitions: template A with the noun masked by the slot form."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
    items = []
    for i in range(spec.pairs):
        for _ in range(per_noun):
            # confound is always some other noun's signature verb
            j = (i + 1 + int(rng.integers(spec.pairs - 1))) % spec.pairs
            sentence = _template_a(TARGET_PLACEHOLDER, spec.verb(i),
                                   spec.adjective(i), spec.verb(j))
            context = FewShotContext.from_sentences([sentence])
            items.append(DNItem(spec.noun(i), context))
    return items


def miniature_trainer_config(model_kind: str, seed: int = 3) -> TrainerConfig:
    """Library-default hyperparameters with the threshold adapted to corpus size."""
    return TrainerConfig(model_kind=model_kind, subsample_tau=MINIATURE_TAU, seed=seed)


def miniature_fsl_config(method: str) -> FSLConfig:
    # k = 0: over a ~200-word vocabulary the noise-weighted mean has a norm
    # comparable to the word vectors, so subtracting 15 of them would make
    # every inferred vector collinear.  The k > 0 path has its own tests.
    return FSLConfig(tau=MINIATURE_TAU, k=0, method=method)


def write_miniature(directory, spec: MiniatureSpec = MiniatureSpec(),
                    per_noun: int = 1) -> dict[str, Path]:
    """Materialize corpus and definition set in the on-disk dataset formats."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    corpus_path = directory / "corpus.conllu"
    save_conllu(generate_corpus(spec), corpus_path)

    sent_dir = directory / "dn"
    sent_dir.mkdir(exist_ok=True)
    dn_path = directory / "dn.tsv"
    with open(dn_path, "w", encoding="utf-8") as fh:
        for ordinal, item in enumerate(generate_dn_items(spec, per_noun), start=1):
            rel = f"dn/item_{ordinal:03d}.conllu"
            save_conllu(item.definition.sentences, directory / rel)
            fh.write(f"{item.word}\t{rel}\n")
    return {"corpus": corpus_path, "dn": dn_path}
