"""Command-line front end for vocabularies, training, inference and evaluation.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines using the
same keys as the flags; explicit flags win over file values, and unknown keys
are rejected.  Exit codes: 0 success, 2 usage or input error, 3 empty result,
4 numeric failure, 5 empty context.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .corpus import (
    ConlluError,
    build_vocabulary,
    load_conllu,
    load_vocabulary,
    save_vocabulary,
)
from .evaluation import (
    DatasetError,
    EvaluationError,
    eval_chimera,
    eval_crw,
    eval_dn,
    load_chimera_dataset,
    load_crw_dataset,
    load_dn_dataset,
    write_report_human,
    write_report_machine,
)
from .fewshot import (
    EmptyContextError,
    FewShotContext,
    FSLConfig,
    Inferencer,
    METHODS,
    TARGET_PLACEHOLDER,
    write_diagnostics,
)
from .spaces import (
    FormatError,
    VersionError,
    load_matrices,
    load_space,
    save_matrices,
    save_space,
    write_vectors_text,
)
from .stopwords import load_stopwords
from .training import MODEL_KINDS, TrainerConfig, TrainingError, train

SPACE_FILE = "space.bin"
MATRICES_FILE = "matrices.bin"
VOCAB_FILE = "vocab.txt"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EMPTY_RESULT = 3
EXIT_NUMERIC = 4
EXIT_EMPTY_CONTEXT = 5


class RunConfig(dict):
    """Merged view of config-file values and flags; flags win."""

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key) from None


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


@dataclass(frozen=True)
class _Opt:
    key: str
    parse: Callable[[str], object]
    default: object = None
    help: str = ""
    required: bool = False
    choices: Optional[tuple] = None


def _add_options(parser: argparse.ArgumentParser, opts: list[_Opt]) -> None:
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="key=value file; flags override its values")
    for opt in opts:
        flag = "--" + opt.key.replace("_", "-")
        suffix = "" if opt.required else f" (default: {opt.default})"
        if opt.parse is _bool:
            parser.add_argument(flag, dest=opt.key, action=argparse.BooleanOptionalAction,
                                default=argparse.SUPPRESS, help=opt.help + suffix)
        else:
            parser.add_argument(flag, dest=opt.key, type=opt.parse,
                                default=argparse.SUPPRESS, choices=opt.choices,
                                help=opt.help + suffix)


def _merge(parser: argparse.ArgumentParser, opts: list[_Opt],
           namespace: argparse.Namespace) -> RunConfig:
    by_key = {opt.key: opt for opt in opts}
    values = RunConfig({opt.key: opt.default for opt in opts})
    if namespace.config:
        with open(namespace.config, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, text = line.partition("=")
                key = key.strip().replace("-", "_")
                if not sep:
                    parser.error(f"{namespace.config}: line {lineno}: expected key=value")
                if key not in by_key:
                    parser.error(f"{namespace.config}: line {lineno}: unknown key {key!r}")
                try:
                    values[key] = by_key[key].parse(text.strip())
                except ValueError as exc:
                    parser.error(f"{namespace.config}: line {lineno}: {exc}")
    for key, value in vars(namespace).items():
        if key in values:
            values[key] = value
    for opt in opts:
        if opt.required and values[opt.key] is None:
            parser.error(f"--{opt.key.replace('_', '-')} is required")
        if opt.choices and values[opt.key] not in opt.choices:
            parser.error(f"--{opt.key.replace('_', '-')}: invalid choice {values[opt.key]!r}")
    return values


# --- shared option groups -------------------------------------------------------

def _fsl_opts() -> list[_Opt]:
    return [
        _Opt("method", str, "additive", "inference method", choices=METHODS),
        _Opt("tau", float, 1e-6, "subsampling threshold"),
        _Opt("k", int, 15, "negative-sampling coefficient"),
        _Opt("n", int, 5, "window size"),
        _Opt("stopwords", str, None, "file with one stop word per line (default: built-in list)"),
        _Opt("reverse_matrix_order", _bool, False,
             "apply the target-side matrix first in dm-additive chains"),
        _Opt("target_form", str, TARGET_PLACEHOLDER, "surface form marking the rare-word slot"),
    ]


def _fsl_config(values: RunConfig) -> FSLConfig:
    stopwords = load_stopwords(values.stopwords) if values.stopwords else None
    kwargs = dict(tau=values.tau, k=values.k, n=values.n, method=values.method,
                  reverse_matrix_order=values.reverse_matrix_order)
    if stopwords is not None:
        kwargs["stopwords"] = stopwords
    return FSLConfig(**kwargs)


def _load_space_dir(directory: str, need_matrices: bool):
    space_path = Path(directory) / SPACE_FILE
    if not space_path.exists():
        raise FileNotFoundError(f"{space_path} not found; is {directory!r} a trained space?")
    space = load_space(space_path)
    matrices_path = Path(directory) / MATRICES_FILE
    matrices = load_matrices(matrices_path) if matrices_path.exists() else None
    if need_matrices and matrices is None:
        raise ValueError(f"method needs dependency matrices but {matrices_path} does not exist")
    return space, matrices


# --- subcommands ---------------------------------------------------------------------

def cmd_vocab(values: RunConfig) -> int:
    sentences = load_conllu(values.corpus)
    vocab = build_vocabulary(sentences, min_count=values.min_count,
                             lowercase=values.lowercase)
    if len(vocab) == 0:
        print("error: empty vocabulary (min-count too high?)", file=sys.stderr)
        return EXIT_EMPTY_RESULT
    save_vocabulary(vocab, values.out)
    print(f"wrote {len(vocab)} words to {values.out}", file=sys.stderr)
    return EXIT_OK


def cmd_train(values: RunConfig) -> int:
    sentences = load_conllu(values.corpus)
    if values.vocab:
        vocab = load_vocabulary(values.vocab)
    else:
        vocab = build_vocabulary(sentences)
    config = TrainerConfig(
        model_kind=values.model, dim=values.dim, negatives=values.negatives,
        batch_size=values.batch, learning_rate=values.lr, window=values.window,
        subsample_tau=values.tau, epochs=values.epochs, seed=values.seed,
        threads=values.threads)
    print(f"training config: model={config.model_kind} dim={config.dim} "
          f"k={config.negatives} batch={config.batch_size} lr={config.learning_rate} "
          f"window={config.window} tau={config.subsample_tau} epochs={config.epochs} "
          f"seed={config.seed} threads={config.threads}", file=sys.stderr)
    result = train(sentences, vocab, config)
    out = Path(values.out)
    out.mkdir(parents=True, exist_ok=True)
    save_space(result.space, out / SPACE_FILE)
    if result.matrices is not None:
        save_matrices(result.matrices, out / MATRICES_FILE)
    save_vocabulary(vocab, out / VOCAB_FILE)
    print(f"wrote space to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_infer(values: RunConfig) -> int:
    cfg = _fsl_config(values)
    space, matrices = _load_space_dir(values.space, cfg.method == "dm-additive")
    sentences = load_conllu(values.contexts)
    context = FewShotContext.from_sentences(sentences, values.target_form)
    inferencer = Inferencer(space, cfg, matrices)
    records = [] if values.diagnostics else None
    vector = inferencer.infer(context, diagnostics=records)
    write_vectors_text([values.target_form], np.asarray([vector]), values.out)
    if values.diagnostics:
        with open(values.diagnostics, "w", encoding="utf-8") as fh:
            write_diagnostics(records, fh)
    print(f"wrote inferred vector to {values.out}", file=sys.stderr)
    return EXIT_OK


def _run_eval(values: RunConfig, kind: str) -> int:
    cfg = _fsl_config(values)
    space, matrices = _load_space_dir(values.space, cfg.method == "dm-additive")
    if kind == "dn":
        items = load_dn_dataset(values.data, values.target_form)
        report = eval_dn(space, cfg, items, matrices)
    elif kind == "chimera":
        items = load_chimera_dataset(values.data, values.target_form)
        report = eval_chimera(space, cfg, items, trial_sizes=values.sizes, matrices=matrices)
    else:
        items = load_crw_dataset(values.data, values.target_form)
        report = eval_crw(space, cfg, items, sizes=values.sizes,
                          selections=values.selections, seed=values.seed, matrices=matrices)
    with open(values.report, "w", encoding="utf-8") as fh:
        write_report_machine(report, fh)
    write_report_human(report, sys.stdout)
    return EXIT_OK


# --- parser and dispatch ------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="depfew",
        description="Dependency-aware embedding training and few-shot rare-word inference.")
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, tuple[list[_Opt], Callable[[RunConfig], int], argparse.ArgumentParser]] = {}

    def register(name, opts, handler, sub):
        _add_options(sub, opts)
        registry[name] = (opts, handler, sub)

    register("vocab", [
        _Opt("corpus", str, help="CoNLL-U training corpus", required=True),
        _Opt("min_count", int, 1, "discard words seen fewer times"),
        _Opt("lowercase", _bool, True, "lowercase all forms"),
        _Opt("out", str, help="output vocabulary file", required=True),
    ], cmd_vocab, subs.add_parser("vocab", help="count words in a corpus"))

    register("train", [
        _Opt("model", str, help="background model kind", required=True, choices=MODEL_KINDS),
        _Opt("corpus", str, help="CoNLL-U training corpus", required=True),
        _Opt("vocab", str, None, "vocabulary file (default: built from the corpus)"),
        _Opt("dim", int, 100, "embedding dimensionality"),
        _Opt("negatives", int, 15, "negative samples per tuple"),
        _Opt("batch", int, 5, "tuples per Adagrad step"),
        _Opt("lr", float, 0.025, "initial Adagrad learning rate"),
        _Opt("window", int, 5, "window size (skipgram only)"),
        _Opt("tau", float, 1e-6, "subsampling threshold"),
        _Opt("epochs", int, 5, "passes over the corpus"),
        _Opt("seed", int, 1, "random seed"),
        _Opt("threads", int, 1, "worker threads (>1 is nondeterministic)"),
        _Opt("out", str, help="output directory", required=True),
    ], cmd_train, subs.add_parser("train", help="train a background model"))

    register("infer", _fsl_opts() + [
        _Opt("space", str, help="trained space directory", required=True),
        _Opt("contexts", str, help="CoNLL-U file of slotted context sentences", required=True),
        _Opt("diagnostics", str, None, "write per-context-word diagnostics here"),
        _Opt("out", str, help="output text vector file", required=True),
    ], cmd_infer, subs.add_parser("infer", help="infer a rare word's vector"))

    eval_parser = subs.add_parser("eval", help="run an evaluation protocol")
    eval_subs = eval_parser.add_subparsers(dest="protocol", required=True)
    common = _fsl_opts() + [
        _Opt("space", str, help="trained space directory", required=True),
        _Opt("data", str, help="dataset TSV", required=True),
        _Opt("report", str, help="machine-readable report file", required=True),
    ]
    register("eval:dn", list(common),
             lambda v: _run_eval(v, "dn"),
             eval_subs.add_parser("dn", help="definition sentences, MRR and median rank"))
    register("eval:chimera", common + [
        _Opt("sizes", _int_list, [2, 4, 6], "trial sizes (comma-separated)"),
    ], lambda v: _run_eval(v, "chimera"),
        eval_subs.add_parser("chimera", help="chimera trials, per-item Spearman"))
    register("eval:crw", common + [
        _Opt("sizes", _int_list, [1, 2, 4, 8, 16], "context counts (comma-separated)"),
        _Opt("selections", int, 10, "random draws per size"),
        _Opt("seed", int, 0, "seed for the draws"),
    ], lambda v: _run_eval(v, "crw"),
        eval_subs.add_parser("crw", help="rare-word contexts, Spearman over draws"))

    return parser, registry


def main(argv=None) -> int:
    parser, registry = _build_parser()
    try:
        namespace = parser.parse_args(argv)
        name = namespace.command
        if name == "eval":
            name = f"eval:{namespace.protocol}"
        opts, handler, sub = registry[name]
        values = _merge(sub, opts, namespace)
        return handler(values)
    except SystemExit as exc:  # argparse --help or usage error
        code = exc.code
        return code if isinstance(code, int) else (EXIT_OK if code is None else EXIT_USAGE)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EmptyContextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_CONTEXT
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_RESULT
    except (ConlluError, DatasetError, FormatError, VersionError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
