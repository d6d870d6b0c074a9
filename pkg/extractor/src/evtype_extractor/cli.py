"""Command-line entry points for the extractor.

Subcommands:

* ``build-dump`` - retrieve anchor sentences from a corpus and write an
  anchor embedding dump.
* ``adapt-srl`` - convert SRL frames plus entity detections into an event
  mention file.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable inputs,
malformed rows, failed retrieval).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .anchors import (
    AnchorRetrievalError,
    AnchorSpecError,
    load_anchor_specs,
    load_corpus,
)
from .encoders import make_encoder
from .extraction import AlignmentError
from .formats import write_dump, write_mentions
from .pipeline import build_dump_records
from .srl import SrlFormatError, adapt_srl, load_detections, load_srl

log = logging.getLogger("evtype_extractor")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="evtype-extract", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command")

    build = sub.add_parser("build-dump", help="embed anchor sentences into a dump file")
    build.add_argument("--corpus", required=True, help="text corpus, one sentence per line")
    build.add_argument("--anchors", required=True, help="anchor spec JSON file")
    build.add_argument("--output", required=True, help="dump file to write")
    build.add_argument(
        "--n-sentences", type=int, default=10, help="anchor sentences per word (default 10)"
    )
    build.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    build.add_argument(
        "--encoder",
        default="hash",
        help="encoder config: hash, hash:<dim>, or transformers:<model> (default hash)",
    )
    build.add_argument(
        "--trigger-strategy",
        choices=("full", "masked"),
        default="full",
        help="extraction strategy for trigger labels (default full)",
    )
    build.add_argument(
        "--argument-strategy",
        choices=("full", "masked"),
        default="masked",
        help="extraction strategy for argument labels (default masked)",
    )
    build.add_argument("--text", action="store_true", help="write the text dump variant")

    adapt = sub.add_parser("adapt-srl", help="turn SRL output into an event mention file")
    adapt.add_argument("--srl", required=True, help="SRL rows, one JSON object per line")
    adapt.add_argument(
        "--detections", required=True, help="entity detector rows, one JSON object per line"
    )
    adapt.add_argument("--output", required=True, help="mention file to write")
    adapt.add_argument(
        "--encoder",
        default="hash",
        help="encoder config: hash, hash:<dim>, or transformers:<model> (default hash)",
    )
    adapt.add_argument(
        "--anchors",
        default=None,
        help="optional anchor spec file; its trigger words become nominal trigger candidates",
    )
    adapt.add_argument(
        "--no-nominal",
        action="store_true",
        help="skip nominal trigger candidates even when --anchors is given",
    )
    return parser


def _run_build_dump(args: argparse.Namespace) -> int:
    specs = load_anchor_specs(args.anchors)
    corpus = load_corpus(args.corpus)
    encoder = make_encoder(args.encoder)
    records = build_dump_records(
        specs,
        corpus,
        encoder,
        n_sentences=args.n_sentences,
        seed=args.seed,
        trigger_strategy=args.trigger_strategy,
        argument_strategy=args.argument_strategy,
    )
    write_dump(records, args.output, text=args.text)
    log.info("wrote %d records to %s", len(records), args.output)
    return EXIT_OK


def _run_adapt_srl(args: argparse.Namespace) -> int:
    srl_rows = load_srl(args.srl)
    detections = load_detections(args.detections)
    encoder = make_encoder(args.encoder)
    nominal_words: list[str] = []
    if args.anchors and not args.no_nominal:
        for spec in load_anchor_specs(args.anchors):
            if spec.kind == "trigger":
                nominal_words.extend(spec.anchor_words)
    events = adapt_srl(srl_rows, detections, encoder, nominal_words=nominal_words)
    write_mentions(events, args.output)
    log.info("wrote %d events to %s", len(events), args.output)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command is None:
        print("error: a subcommand is required (build-dump, adapt-srl)", file=sys.stderr)
        return EXIT_USAGE
    runner = {"build-dump": _run_build_dump, "adapt-srl": _run_adapt_srl}[args.command]
    try:
        return runner(args)
    except (
        AnchorSpecError,
        AnchorRetrievalError,
        SrlFormatError,
        AlignmentError,
        OSError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
