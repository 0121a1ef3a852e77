"""A deterministic fallback parser, loadable as ``preproc.simple:build``.

Not a linguistic model: sentences split on terminal punctuation or blank
lines, tokens on whitespace with surrounding punctuation stripped, and the
tree is a left-attaching chain (first token root, every later token hangs
off its predecessor).  It exists so the conversion machinery and its tests
run identically on machines without a learned parser installed.
"""

import re
from typing import Sequence

from depfew import ParsedSentence, Token

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+|\n+")
# underscores stay so slot tokens like "___" survive tokenization
_EDGE_PUNCT = '.,;:!?"\'()[]{}<>'


class SimplePipeline:
    name = "preproc.simple"
    version = "0.1.0"

    def parse(self, text: str) -> list[ParsedSentence]:
        sentences = []
        for segment in _SENTENCE_SPLIT.split(text):
            forms = []
            for raw in segment.split():
                form = raw.strip(_EDGE_PUNCT)
                if form:
                    forms.append(form)
            if not forms:
                continue
            tokens = [Token(i, form, i - 1, "dep" if i > 1 else "root")
                      for i, form in enumerate(forms, start=1)]
            sentences.append(ParsedSentence(tuple(tokens)))
        return sentences

    def parse_many(self, texts: Sequence[str]) -> list[list[ParsedSentence]]:
        return [self.parse(text) for text in texts]


def build() -> SimplePipeline:
    return SimplePipeline()
