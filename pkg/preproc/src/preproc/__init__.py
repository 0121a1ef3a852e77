"""Convert raw text and originally-distributed evaluation files into the
CoNLL-U-based formats consumed by the depfew package.

Parsing is delegated to a pluggable pipeline: a spaCy model named on the
command line, or any "module:factory" dotted path producing an object with
``name``, ``version``, ``parse(text)`` and ``parse_many(texts)``.  A
deterministic heuristic parser ships as ``preproc.simple:build`` so the
conversion machinery runs without a learned model installed.
"""

__version__ = "0.1.0"

from .pipeline import PipelineError, SpacyPipeline, load_pipeline
from .jobs import (
    MANIFEST_FILE,
    ConvertResult,
    PreprocJob,
    convert_eval_dataset,
    parse_corpus,
    read_manifest,
)
from .simple import SimplePipeline, build as build_simple_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
