"""Loading and adapting dependency-parsing pipelines.

A pipeline is any object with a ``name`` string, a ``version`` string,
``parse(text) -> list[ParsedSentence]`` and
``parse_many(texts) -> list[list[ParsedSentence]]``.  Model identifiers of
the form "module:factory" are resolved through importlib (the factory is
called with no arguments); anything else is treated as a spaCy model name.
"""

import importlib
from typing import Sequence

from depfew import ParsedSentence, Token


class PipelineError(RuntimeError):
    """A parsing pipeline could not be loaded or is unusable."""


_REQUIRED_ATTRS = ("name", "version", "parse", "parse_many")


def _validate(pipeline, identifier: str):
    missing = [a for a in _REQUIRED_ATTRS if not hasattr(pipeline, a)]
    if missing:
        raise PipelineError(
            f"object from {identifier!r} is not a pipeline: missing {', '.join(missing)}")
    return pipeline


class SpacyPipeline:
    """Adapter around a loaded spaCy Language object."""

    def __init__(self, nlp, name: str, batch_size: int = 64):
        self.nlp = nlp
        self.name = name
        self.version = str(nlp.meta.get("version", "unknown"))
        self.batch_size = batch_size

    def _convert(self, doc) -> list[ParsedSentence]:
        sentences = []
        for sent in doc.sents:
            tokens = []
            offset = sent.start
            position = 0
            keep = {}
            for tok in sent:
                if tok.text.strip():
                    position += 1
                    keep[tok.i - offset] = position
            for tok in sent:
                if not tok.text.strip():
                    continue
                if tok.head is tok or tok.dep_.lower() == "root":
                    head = 0
                else:
                    head = keep.get(tok.head.i - offset, 0)
                tokens.append(Token(keep[tok.i - offset], tok.text,
                                    head, tok.dep_.lower()))
            if tokens:
                sentences.append(ParsedSentence(tuple(tokens)))
        return sentences

    def parse(self, text: str) -> list[ParsedSentence]:
        return self._convert(self.nlp(text))

    def parse_many(self, texts: Sequence[str]) -> list[list[ParsedSentence]]:
        return [self._convert(doc)
                for doc in self.nlp.pipe(texts, batch_size=self.batch_size)]


def load_pipeline(model: str, batch_size: int = 64):
    """Resolve a model identifier to a ready pipeline object."""
    if not model:
        raise PipelineError("empty pipeline model identifier")
    if ":" in model:
        module_name, _, attr = model.partition(":")
        try:
            module = importlib.import_module(module_name)
        except ImportError as exc:
            raise PipelineError(f"cannot import {module_name!r} for pipeline "
                                f"{model!r}: {exc}") from None
        try:
            factory = getattr(module, attr)
        except AttributeError:
            raise PipelineError(f"module {module_name!r} has no attribute {attr!r} "
                                f"(pipeline {model!r})") from None
        return _validate(factory(), model)
    try:
        import spacy
    except ImportError:
        raise PipelineError(
            f"pipeline model {model!r} requires the spacy package, which is not "
            f"installed; run 'pip install spacy' and "
            f"'python3 -m spacy download {model}', or pass a module:factory "
            f"identifier such as preproc.simple:build") from None
    try:
        nlp = spacy.load(model)
    except OSError:
        raise PipelineError(
            f"spaCy model {model!r} is not installed; run "
            f"'python3 -m spacy download {model}'") from None
    return SpacyPipeline(nlp, model, batch_size)
