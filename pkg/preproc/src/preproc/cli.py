"""Command-line interface: parse raw text, convert evaluation datasets.

    preproc parse --in DIR --out DIR --model NAME
    preproc convert --kind dn|chimera|crw --in PATH --out DIR

Exit codes: 0 ok, 2 usage/input/pipeline error, 3 nothing converted.
"""

import argparse
import sys
from pathlib import Path

from depfew import TARGET_PLACEHOLDER

from .jobs import DATASET_KINDS, PreprocJob, convert_eval_dataset, parse_corpus
from .pipeline import PipelineError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EMPTY_RESULT = 3

DEFAULT_MODEL = "en_core_web_sm"


def _expand_inputs(paths: list[str]) -> list[Path]:
    """Directories expand to their sorted *.txt members; files pass through."""
    inputs = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            inputs.extend(sorted(path.glob("*.txt")))
        else:
            inputs.append(path)
    return inputs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="preproc",
        description="Parse raw text and evaluation datasets into depfew's formats.")
    subs = parser.add_subparsers(dest="command", required=True)

    parse_cmd = subs.add_parser("parse", help="parse raw text files to CoNLL-U")
    parse_cmd.add_argument("--in", dest="inputs", nargs="+", required=True,
                           metavar="PATH", help="input text files or directories")
    parse_cmd.add_argument("--out", required=True, help="output directory")
    parse_cmd.add_argument("--model", default=DEFAULT_MODEL,
                           help="spaCy model name or module:factory identifier")
    parse_cmd.add_argument("--batch", type=int, default=64,
                           help="pipeline batch size")
    parse_cmd.add_argument("--workers", type=int, default=1,
                           help="parallel workers (pipeline loaded per worker)")
    parse_cmd.add_argument("--placeholder", default=TARGET_PLACEHOLDER,
                           help="slot form reserved for unknown targets")

    convert_cmd = subs.add_parser("convert", help="convert an evaluation dataset")
    convert_cmd.add_argument("--kind", required=True, choices=DATASET_KINDS,
                             help="dataset protocol")
    convert_cmd.add_argument("--in", dest="inputs", required=True, metavar="PATH",
                             help="original dataset file")
    convert_cmd.add_argument("--out", required=True, help="output directory")
    convert_cmd.add_argument("--model", default=DEFAULT_MODEL,
                             help="spaCy model name or module:factory identifier")
    convert_cmd.add_argument("--batch", type=int, default=64,
                             help="pipeline batch size")
    convert_cmd.add_argument("--placeholder", default=TARGET_PLACEHOLDER,
                             help="slot form inserted over the target word")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "parse":
            inputs = _expand_inputs(args.inputs)
            if not inputs:
                parser.error("no input files found")
            job = PreprocJob(tuple(inputs), Path(args.out), args.model,
                             args.placeholder, args.batch)
            written = parse_corpus(job, workers=args.workers, log=sys.stderr)
            print(f"parsed {len(written)} files into {args.out}", file=sys.stderr)
            return EXIT_OK
        job = PreprocJob((Path(args.inputs),), Path(args.out), args.model,
                         args.placeholder, args.batch)
        result = convert_eval_dataset(args.kind, job, log=sys.stderr)
        print(f"converted {result.items} items "
              f"({len(result.excluded)} excluded) into {result.dataset_path}",
              file=sys.stderr)
        if result.items == 0:
            print("error: no items survived conversion", file=sys.stderr)
            return EXIT_EMPTY_RESULT
        return EXIT_OK
    except SystemExit as exc:
        code = exc.code
        return 0 if code is None else code if isinstance(code, int) else EXIT_USAGE
    except (PipelineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
