"""Corpus parsing and evaluation-dataset conversion jobs.

Both entry points write into a fresh output directory: CoNLL-U files in the
formats the depfew loaders accept, plus a ``manifest.tsv`` pinning the
pipeline model name and version for provenance.  Items whose target word
cannot be isolated as exactly one placeholder token are excluded with a log
line rather than aborting the whole conversion.
"""

import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

from depfew import TARGET_PLACEHOLDER, ParsedSentence, save_conllu

from .pipeline import load_pipeline

MANIFEST_FILE = "manifest.tsv"
DATASET_KINDS = ("dn", "chimera", "crw")

# depfew's ChimeraItem rejects trials with fewer probes or longer contexts,
# so enforcing the bounds here keeps every emitted dataset loadable
_CHIMERA_MIN_PROBES = 2
_CHIMERA_MAX_SENTENCES = 6


@dataclass(frozen=True)
class PreprocJob:
    inputs: tuple
    out_dir: Path
    model: str
    placeholder: str = TARGET_PLACEHOLDER
    batch_size: int = 64

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.inputs:
            raise ValueError("no input paths")
        if not self.placeholder:
            raise ValueError("empty placeholder form")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        out = self.out_dir.resolve()
        for path in self.inputs:
            resolved = path.resolve()
            if resolved == out or resolved.parent == out:
                raise ValueError(f"output directory {self.out_dir} overlaps input {path}")


def write_manifest(out_dir: Path, pipeline, kind: str, items: int, excluded: int) -> Path:
    path = Path(out_dir) / MANIFEST_FILE
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"model\t{pipeline.name}\n")
        fh.write(f"model_version\t{pipeline.version}\n")
        fh.write(f"kind\t{kind}\n")
        fh.write(f"items\t{items}\n")
        fh.write(f"excluded\t{excluded}\n")
    return path


def read_manifest(out_dir) -> dict:
    entries = {}
    with open(Path(out_dir) / MANIFEST_FILE, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                key, _, value = line.rstrip("\n").partition("\t")
                entries[key] = value
    return entries


# --- raw corpus parsing ----------------------------------------------------------

_worker_pipeline = None


def _worker_init(model: str, batch_size: int):
    global _worker_pipeline
    _worker_pipeline = load_pipeline(model, batch_size)


def _worker_parse(text: str):
    return _worker_pipeline.parse(text)


def _output_names(paths: Sequence[Path]) -> list[str]:
    names, seen = [], set()
    for path in paths:
        name = path.stem
        suffix = 1
        while name in seen:
            suffix += 1
            name = f"{path.stem}_{suffix}"
        seen.add(name)
        names.append(name + ".conllu")
    return names


def parse_corpus(job: PreprocJob, pipeline=None, workers: int = 1,
                 log: Optional[TextIO] = None) -> list[Path]:
    """Parse one document per input file into CoNLL-U under job.out_dir."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if pipeline is None:
        pipeline = load_pipeline(job.model, job.batch_size)
    texts = [path.read_text(encoding="utf-8") for path in job.inputs]
    if workers == 1:
        parsed = pipeline.parse_many(texts)
    else:
        # the pipeline object is rebuilt inside each worker; only the model
        # identifier crosses the process boundary
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                 initargs=(job.model, job.batch_size)) as pool:
            parsed = list(pool.map(_worker_parse, texts))

    job.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path, name, sentences in zip(job.inputs, _output_names(job.inputs), parsed):
        if not sentences and log:
            log.write(f"warning: {path}: empty document\n")
        out_path = job.out_dir / name
        save_conllu(sentences, out_path)
        written.append(out_path)
    write_manifest(job.out_dir, pipeline, "corpus", len(written), 0)
    return written


# --- evaluation dataset conversion -------------------------------------------------

@dataclass
class ConvertResult:
    kind: str
    dataset_path: Path
    items: int
    excluded: list = field(default_factory=list)


def _substitute(text: str, target: str, placeholder: str) -> str:
    """Leave existing placeholders alone, else mask whole-word target matches."""
    if placeholder in text:
        return text
    pattern = re.compile(rf"(?<!\w){re.escape(target)}(?!\w)", re.IGNORECASE)
    return pattern.sub(placeholder, text)


def _slotted(pipeline, text: str, placeholder: str):
    """The single parsed sentence holding exactly one slot, or (None, reason)."""
    with_slot = []
    for sent in pipeline.parse(text):
        count = sum(1 for tok in sent.tokens if tok.form == placeholder)
        if count:
            with_slot.append((sent, count))
    if not with_slot:
        return None, "target does not occur"
    if len(with_slot) > 1:
        return None, "target occurs in more than one sentence"
    sent, count = with_slot[0]
    if count != 1:
        return None, f"expected exactly one slot token, found {count}"
    return sent, ""


def _read_rows(path: Path, n_cols: int, layout: str) -> list[tuple[int, list[str]]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != n_cols:
                raise ValueError(f"{path}: line {lineno}: expected {layout!r}, "
                                 f"got {len(cols)} columns")
            rows.append((lineno, cols))
    return rows


def _dirname(ordinal: int, name: str) -> str:
    return f"{ordinal:04d}_" + re.sub(r"[^\w.-]", "_", name)


def _exclude(excluded, log, item: str, reason: str):
    excluded.append((item, reason))
    if log:
        log.write(f"excluded {item}: {reason}\n")


def _parse_float(in_path, lineno: int, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"{in_path}: line {lineno}: bad rating {value!r}") from None


def _convert_dn(in_path, out_dir, pipeline, placeholder, log, excluded) -> list[str]:
    sent_dir = out_dir / "sentences"
    sent_dir.mkdir(exist_ok=True)
    lines = []
    for lineno, cols in _read_rows(in_path, 2, "word<TAB>definition"):
        word, definition = cols
        sent, reason = _slotted(pipeline, _substitute(definition, word, placeholder),
                                placeholder)
        if sent is None:
            _exclude(excluded, log, word, reason)
            continue
        rel = f"sentences/item_{len(lines) + 1:04d}.conllu"
        save_conllu([sent], out_dir / rel)
        lines.append(f"{word}\t{rel}")
    return lines


def _convert_chimera(in_path, out_dir, pipeline, placeholder, log, excluded) -> list[str]:
    lines = []
    layout = "id<TAB>passages<TAB>probes<TAB>ratings"
    for lineno, cols in _read_rows(in_path, 4, layout):
        trial_id, passages_col, probes_col, ratings_col = cols
        probes = [p for p in re.split(r"[,\s]+", probes_col) if p]
        ratings = [r for r in re.split(r"[,\s]+", ratings_col) if r]
        for value in ratings:
            _parse_float(in_path, lineno, value)
        if len(probes) != len(ratings):
            raise ValueError(f"{in_path}: line {lineno}: {len(probes)} probes vs "
                             f"{len(ratings)} ratings")
        if len(probes) < _CHIMERA_MIN_PROBES:
            raise ValueError(f"{in_path}: line {lineno}: need at least "
                             f"{_CHIMERA_MIN_PROBES} probes, got {len(probes)}")
        passages = [p for p in passages_col.split("@@") if p.strip()]
        if not passages:
            _exclude(excluded, log, trial_id, "no passages")
            continue
        if len(passages) > _CHIMERA_MAX_SENTENCES:
            _exclude(excluded, log, trial_id,
                     f"{len(passages)} passages exceed the limit of "
                     f"{_CHIMERA_MAX_SENTENCES} context sentences")
            continue
        sentences = []
        for ordinal, passage in enumerate(passages, start=1):
            sent, reason = _slotted(pipeline, _substitute(passage, trial_id, placeholder),
                                    placeholder)
            if sent is None:
                _exclude(excluded, log, trial_id, f"passage {ordinal}: {reason}")
                break
            sentences.append(sent)
        if len(sentences) != len(passages):
            continue
        rel = _dirname(len(lines) + 1, trial_id)
        (out_dir / rel).mkdir(exist_ok=True)
        for ordinal, sent in enumerate(sentences, start=1):
            save_conllu([sent], out_dir / rel / f"sent_{ordinal}.conllu")
        lines.append(f"{trial_id}\t{','.join(probes)}\t{','.join(ratings)}\t{rel}")
    return lines


def _convert_crw(in_path, out_dir, pipeline, placeholder, log, excluded) -> list[str]:
    contexts_dir = in_path.parent / "contexts"
    lines = []
    for lineno, cols in _read_rows(in_path, 3, "rare<TAB>frequent<TAB>score"):
        rare, frequent, score = cols
        _parse_float(in_path, lineno, score)
        source = contexts_dir / f"{rare}.txt"
        if not source.exists():
            _exclude(excluded, log, rare, f"missing context file {source}")
            continue
        sentences = []
        with open(source, encoding="utf-8") as fh:
            for ctx_lineno, raw in enumerate(fh, start=1):
                text = raw.strip()
                if not text:
                    continue
                sent, reason = _slotted(pipeline, _substitute(text, rare, placeholder),
                                        placeholder)
                if sent is None:
                    if log:
                        log.write(f"item {rare}: sentence {ctx_lineno} dropped: {reason}\n")
                    continue
                sentences.append(sent)
        if not sentences:
            _exclude(excluded, log, rare, "no usable context sentences")
            continue
        rel = _dirname(len(lines) + 1, rare)
        (out_dir / rel).mkdir(exist_ok=True)
        for ordinal, sent in enumerate(sentences, start=1):
            save_conllu([sent], out_dir / rel / f"sent_{ordinal}.conllu")
        lines.append(f"{rare}\t{frequent}\t{score}\t{rel}")
    return lines


_CONVERTERS = {"dn": _convert_dn, "chimera": _convert_chimera, "crw": _convert_crw}


def convert_eval_dataset(kind: str, job: PreprocJob, pipeline=None,
                         log: Optional[TextIO] = None) -> ConvertResult:
    """Turn an originally-distributed dataset into the depfew on-disk layout.

    Expected inputs: dn "word<TAB>definition" rows; chimera
    "id<TAB>passages @@-joined<TAB>probes<TAB>ratings" rows; crw
    "rare<TAB>frequent<TAB>score" rows next to a contexts/ directory with
    one <rare>.txt sentence-per-line file per item.
    """
    if kind not in _CONVERTERS:
        raise ValueError(f"unknown dataset kind {kind!r}; expected one of {DATASET_KINDS}")
    if len(job.inputs) != 1:
        raise ValueError(f"{kind} conversion takes exactly one input file")
    if pipeline is None:
        pipeline = load_pipeline(job.model, job.batch_size)
    job.out_dir.mkdir(parents=True, exist_ok=True)

    excluded: list = []
    lines = _CONVERTERS[kind](job.inputs[0], job.out_dir, pipeline,
                              job.placeholder, log, excluded)
    dataset_path = job.out_dir / f"{kind}.tsv"
    with open(dataset_path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")
    write_manifest(job.out_dir, pipeline, kind, len(lines), len(excluded))
    return ConvertResult(kind, dataset_path, len(lines), excluded)
