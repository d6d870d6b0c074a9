"""Command-line entry point: build-clusters, calibrate, classify, evaluate, sweep.

Configuration precedence: command-line flags beat EVTYPE_* environment
variables, which beat the --config JSON file, which beats built-in defaults.
Logs go to standard error (optionally as JSON lines); data goes to files or
standard output. Same inputs and seed produce byte-identical outputs.

Exit codes: 0 success; 1 usage error; 2 data or validation error;
3 classify completed with infeasible events under --strict.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import embedstore, evaluation, filtering, inference, mentions, ontology, scoring
from .embedstore import DumpFormatError
from .inference import InferenceConfig, InfeasibleError
from .mentions import MentionFormatError
from .ontology import OntologyError

log = logging.getLogger("evtype")

ENV_PREFIX = "EVTYPE_"
DEFAULT_SEED = 0
DEFAULT_KS = (1, 3, 5)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3

CONFIG_KEYS = {
    "lambda",
    "threads",
    "seed",
    "strict",
    "enforce_distinct_roles",
    "allow_unassigned_arguments",
    "eval_subset",
}


@dataclass
class RunConfig:
    """Merged settings for one subcommand invocation."""

    ontology_path: str | None = None
    store_path: str | None = None
    mention_path: str | None = None
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    output_path: str | None = None
    seed: int = DEFAULT_SEED
    strict: bool = False
    threads: int | None = None
    eval_subset: list[str] | None = None


class _UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        self.parser = parser
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise _UsageError(self, message)


class _JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps(
            {"level": record.levelname, "logger": record.name, "message": record.getMessage()},
            sort_keys=True,
        )


def _setup_logging(json_logs: bool, verbose: int) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if json_logs:
        handler.setFormatter(_JsonLogFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path}: expected a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ValueError(f"config file {path}: unknown keys {unknown}")
    return data


def _merge(flag_value, env_name: str, file_config: dict, file_key: str, default, cast):
    """Flags > environment > config file > default."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_PREFIX + env_name)
    if env is not None:
        return cast(env)
    if file_key in file_config:
        return cast(file_config[file_key])
    return default


def _env_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    if str(raw).lower() in ("1", "true", "yes", "on"):
        return True
    if str(raw).lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _run_config(args: argparse.Namespace) -> RunConfig:
    file_config = _load_config_file(getattr(args, "config", None))
    lam = _merge(getattr(args, "lam", None), "LAMBDA", file_config, "lambda", 10.0, float)
    distinct = _merge(
        getattr(args, "distinct_roles", None),
        "DISTINCT_ROLES",
        file_config,
        "enforce_distinct_roles",
        True,
        _env_bool,
    )
    unassigned = _merge(
        getattr(args, "allow_unassigned", None),
        "ALLOW_UNASSIGNED",
        file_config,
        "allow_unassigned_arguments",
        False,
        _env_bool,
    )
    subset = _merge(
        getattr(args, "subset", None), "EVAL_SUBSET", file_config, "eval_subset", None, _parse_subset
    )
    return RunConfig(
        ontology_path=getattr(args, "ontology", None),
        store_path=getattr(args, "store", None),
        mention_path=getattr(args, "mentions", None),
        inference=InferenceConfig(
            lam=lam, enforce_distinct_roles=distinct, allow_unassigned_arguments=unassigned
        ),
        output_path=getattr(args, "output", None),
        seed=_merge(getattr(args, "seed", None), "SEED", file_config, "seed", DEFAULT_SEED, int),
        strict=_merge(getattr(args, "strict", None), "STRICT", file_config, "strict", False, _env_bool),
        threads=_merge(getattr(args, "threads", None), "THREADS", file_config, "threads", None, int),
        # The flag arrives as a raw comma-separated string; normalize whatever
        # source won the merge into a list.
        eval_subset=_parse_subset(subset) if subset is not None else None,
    )


def _parse_subset(raw) -> list[str]:
    if isinstance(raw, list):
        return [str(x) for x in raw]
    return [part for part in str(raw).split(",") if part]


def _open_output(path: str | None):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _emit_lines(path: str | None, lines: list[str]) -> None:
    out = _open_output(path)
    try:
        for line in lines:
            out.write(line + "\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _json_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_build_clusters(args: argparse.Namespace) -> int:
    onto = ontology.load_ontology(args.ontology)
    records = embedstore.load_dump(args.dump)
    store = embedstore.build_store(
        records,
        onto,
        trigger_strategy=args.trigger_strategy,
        argument_strategy=args.argument_strategy,
        allow_strategy_mismatch=args.allow_strategy_mismatch,
        ignore_unknown_labels=args.ignore_unknown_labels,
    )
    embedstore.write_store(store, args.output)
    log.info(
        "built %d trigger and %d argument clusters (dim %d)",
        len(store.trigger_clusters),
        len(store.argument_clusters),
        store.dim,
    )
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    store = embedstore.load_store(args.store)
    extra = embedstore.load_dump(args.dump) if args.dump else None
    report = filtering.calibrate_store(store, extra_negatives=extra)
    out_path = args.output or args.store
    embedstore.write_store(store, out_path)
    lines = ["label\tradius\tf1\tpositives\tnegatives"]
    for label in sorted(report):
        cal = report[label]
        lines.append(
            f"{label}\t{cal.radius!r}\t{cal.f1_at_radius!r}"
            f"\t{cal.positives_count}\t{cal.negatives_count}"
        )
    _emit_lines(args.report, lines)
    log.info("calibrated %d clusters, store written to %s", len(report), out_path)
    return EXIT_OK


def _classify_one(
    event: mentions.EventMention,
    store: embedstore.ClusterStore,
    onto: ontology.Ontology,
    config: InferenceConfig,
    use_ilp: bool,
) -> tuple[dict, bool]:
    scores = scoring.score_event(event, store)
    if not use_ilp:
        record = {
            "event_id": event.event_id,
            "trigger_ranking": scoring.rank(scores.trigger_scores, len(scores.trigger_scores)),
            "role_rankings": [scoring.rank(row, len(row)) for row in scores.argument_scores],
        }
        return record, False
    try:
        typed = inference.solve(event, scores, onto, config)
    except InfeasibleError as err:
        log.warning("event %s infeasible: %s", event.event_id, err)
        return {
            "event_id": event.event_id,
            "infeasible": True,
            "constraint_classes": list(err.constraint_classes),
        }, True
    return {
        "event_id": typed.event_id,
        "trigger_type": typed.trigger_type,
        "argument_roles": typed.argument_roles,
        "objective_value": typed.objective_value,
        "trigger_ranking": typed.trigger_ranking,
        "role_rankings": typed.role_rankings,
    }, False


def _cmd_classify(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    onto = ontology.load_ontology(cfg.ontology_path)
    store = embedstore.load_store(cfg.store_path)
    events = mentions.load_mentions(cfg.mention_path, store=store, ontology=onto, strict=cfg.strict)
    use_ilp = not args.no_ilp
    threads = cfg.threads or os.cpu_count() or 1

    def work(event: mentions.EventMention) -> tuple[dict, bool]:
        return _classify_one(event, store, onto, cfg.inference, use_ilp)

    # Results are collected in input order regardless of completion order.
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(work, events))

    _emit_lines(cfg.output_path, [_json_line(record) for record, _ in results])
    n_infeasible = sum(1 for _, bad in results if bad)
    if n_infeasible:
        log.warning("%d of %d events infeasible", n_infeasible, len(results))
        if cfg.strict:
            return EXIT_INFEASIBLE
    return EXIT_OK


def _load_predictions(path: str) -> dict[str, dict]:
    predictions: dict[str, dict] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{i + 1}: invalid JSON: {err}") from err
            if "event_id" not in record:
                raise ValueError(f"{path}:{i + 1}: record missing event_id")
            predictions[record["event_id"]] = record
    return predictions


def _ranked_labels(ranking: list) -> list[str]:
    return [label for label, _ in ranking]


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    onto = ontology.load_ontology(cfg.ontology_path) if cfg.ontology_path else None
    events = mentions.load_mentions(cfg.mention_path, ontology=onto, strict=False)
    predictions = _load_predictions(args.predictions)
    ks = tuple(int(k) for k in args.ks.split(",")) if args.ks else DEFAULT_KS

    trigger_ranked, trigger_golds = [], []
    role_ranked, role_golds = [], []
    error_lines = []
    pred_trigger_items, gold_trigger_items = [], []
    pred_role_items, gold_role_items = [], []
    for event in events:
        record = predictions.get(event.event_id)
        if record is None:
            raise ValueError(f"no prediction for event {event.event_id!r}")
        if record.get("infeasible"):
            log.warning("skipping infeasible event %s", event.event_id)
            continue
        ranked = _ranked_labels(record["trigger_ranking"])
        top = record.get("trigger_type", ranked[0] if ranked else None)
        span = (event.trigger.sentence_id, event.trigger.start, event.trigger.end)
        pred_trigger_items.append((*span, top))
        if event.gold_type is not None:
            trigger_ranked.append(ranked)
            trigger_golds.append(event.gold_type)
            gold_trigger_items.append((*span, event.gold_type))
            if event.gold_type not in ranked[: max(ks)]:
                error_lines.append(
                    _json_line(
                        {
                            "event_id": event.event_id,
                            "stratum": "triggers",
                            "gold": event.gold_type,
                            "predicted": ranked[: max(ks)],
                        }
                    )
                )
        roles = record.get("argument_roles")
        rankings = record.get("role_rankings", [])
        if len(rankings) != len(event.arguments):
            raise ValueError(
                f"event {event.event_id!r}: prediction has {len(rankings)} role rankings, "
                f"mention has {len(event.arguments)} arguments"
            )
        for j, arg in enumerate(event.arguments):
            row = _ranked_labels(rankings[j])
            predicted_role = roles[j] if roles else (row[0] if row else None)
            arg_span = (arg.span.sentence_id, arg.span.start, arg.span.end)
            if predicted_role is not None and predicted_role != ontology.RESERVED_NONE_ROLE:
                pred_role_items.append((*arg_span, predicted_role))
            if arg.gold_role is not None:
                role_ranked.append(row)
                role_golds.append(arg.gold_role)
                gold_role_items.append((*arg_span, arg.gold_role))
                if arg.gold_role not in row[: max(ks)]:
                    error_lines.append(
                        _json_line(
                            {
                                "event_id": event.event_id,
                                "stratum": "arguments",
                                "argument_index": j,
                                "gold": arg.gold_role,
                                "predicted": row[: max(ks)],
                            }
                        )
                    )

    known = set(onto.event_ids()) if onto else None
    lines = ["stratum\tsubset\tmetric\tvalue\tn_items"]
    if trigger_golds:
        report = evaluation.hit_at_k(
            trigger_ranked,
            trigger_golds,
            ks,
            stratum=evaluation.STRATUM_TRIGGERS,
            known_labels=known,
            strict=cfg.strict,
        )
        lines.extend(_hit_lines(report))
        if cfg.eval_subset:
            report = evaluation.hit_at_k(
                trigger_ranked,
                trigger_golds,
                ks,
                stratum=evaluation.STRATUM_TRIGGERS,
                subset_filter=set(cfg.eval_subset),
                known_labels=known,
                strict=cfg.strict,
            )
            lines.extend(_hit_lines(report))
    if role_golds:
        known_roles = set(onto.role_ids()) if onto else None
        report = evaluation.hit_at_k(
            role_ranked,
            role_golds,
            ks,
            stratum=evaluation.STRATUM_ARGUMENTS,
            known_labels=known_roles,
            strict=cfg.strict,
        )
        lines.extend(_hit_lines(report))
    if args.prf1:
        for stratum, pred_items, gold_items in (
            ("triggers", pred_trigger_items, gold_trigger_items),
            ("arguments", pred_role_items, gold_role_items),
        ):
            for mode in (
                evaluation.MODE_IDENTIFICATION,
                evaluation.MODE_IDENTIFICATION_CLASSIFICATION,
            ):
                report = evaluation.prf1(pred_items, gold_items, mode)
                lines.append(
                    f"{stratum}\t{mode}\tprecision\t{report.precision:.6f}\t{report.tp + report.fp}"
                )
                lines.append(
                    f"{stratum}\t{mode}\trecall\t{report.recall:.6f}\t{report.tp + report.fn}"
                )
                lines.append(f"{stratum}\t{mode}\tf1\t{report.f1:.6f}\t{report.tp}")
    _emit_lines(cfg.output_path, lines)
    if args.errors:
        _emit_lines(args.errors, error_lines)
    return EXIT_OK


def _hit_lines(report: evaluation.HitReport) -> list[str]:
    return [
        f"{report.stratum}\t{report.subset}\thit@{k}\t{v:.6f}\t{report.n_items}"
        for k, v in sorted(report.hit_at.items())
    ]


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    onto = ontology.load_ontology(cfg.ontology_path)
    store = embedstore.load_store(cfg.store_path) if cfg.store_path else None
    records = embedstore.load_dump(args.dump) if args.dump else None
    sidecar = records if args.embedding_ref else None
    events = mentions.load_mentions(cfg.mention_path, store=store, ontology=onto, sidecar=sidecar)
    experiment = args.experiment.replace("-", "_")
    values: list = []
    for part in args.values.split(","):
        values.append(float(part) if experiment == evaluation.EXPERIMENT_LAMBDA else int(part))
    rows = evaluation.sweep(
        experiment,
        values,
        events,
        onto,
        store=store,
        records=records,
        config=cfg.inference,
        seed=cfg.seed,
        trigger_strategy=args.trigger_strategy,
        argument_strategy=args.argument_strategy,
    )
    lines = ["experiment\tvalue\tn_triggers\ttrigger_hit1\tn_arguments\targument_hit1"]
    for row in rows:
        lines.append(
            "\t".join(
                str(row.get(key, ""))
                for key in (
                    "experiment",
                    "value",
                    "n_triggers",
                    "trigger_hit1",
                    "n_arguments",
                    "argument_hit1",
                )
            )
        )
    _emit_lines(cfg.output_path, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    sub.add_argument("--json-logs", action="store_true", help="emit logs as JSON lines")
    sub.add_argument("-v", "--verbose", action="count", default=0, help="increase log verbosity")


def _add_inference_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lambda", dest="lam", type=float, default=None, help="trigger weight (default 10)")
    sub.add_argument(
        "--distinct-roles",
        dest="distinct_roles",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="require distinct roles across arguments (default on)",
    )
    sub.add_argument(
        "--allow-unassigned",
        dest="allow_unassigned",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="permit a reserved NONE role instead of failing infeasible events",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evtype", description="Zero-shot event typing engine")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subparsers.add_parser("build-clusters", help="aggregate a dump into a cluster store")
    p.add_argument("--dump", required=True, help="anchor embedding dump (binary or text)")
    p.add_argument("--ontology", required=True, help="ontology JSON file")
    p.add_argument("--output", required=True, help="cluster store output path")
    p.add_argument("--trigger-strategy", default=embedstore.STRATEGY_FULL)
    p.add_argument("--argument-strategy", default=embedstore.STRATEGY_MASKED)
    p.add_argument("--allow-strategy-mismatch", action="store_true")
    p.add_argument("--ignore-unknown-labels", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_build_clusters)

    p = subparsers.add_parser("calibrate", help="calibrate per-cluster radii by F1")
    p.add_argument("--store", required=True, help="cluster store, updated with radii")
    p.add_argument("--dump", help="extra negative anchor vectors (dump file)")
    p.add_argument("--output", help="write updated store here instead of in place")
    p.add_argument("--report", help="calibration report path (default stdout)")
    _add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    p = subparsers.add_parser("classify", help="type mentions against an ontology")
    p.add_argument("--ontology", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--mentions", required=True)
    p.add_argument("--output", help="typed event output path (default stdout)")
    p.add_argument("--no-ilp", action="store_true", help="emit raw rankings without joint inference")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: cpu count)")
    p.add_argument(
        "--strict",
        dest="strict",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="exit 3 when any event is infeasible; validate gold labels",
    )
    _add_inference_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = subparsers.add_parser("evaluate", help="score predictions against gold mentions")
    p.add_argument("--predictions", required=True, help="classify output (JSON lines)")
    p.add_argument("--mentions", required=True, help="gold mention file")
    p.add_argument("--ontology", help="ontology JSON for label validation")
    p.add_argument("--output", help="metrics report path (default stdout)")
    p.add_argument("--errors", help="per-item error listing path")
    p.add_argument("--ks", help="comma-separated K values (default 1,3,5)")
    p.add_argument("--subset", help="comma-separated event types for subset evaluation")
    p.add_argument("--prf1", action="store_true", help="also report span precision/recall/F1")
    p.add_argument(
        "--strict", dest="strict", action=argparse.BooleanOptionalAction, default=None
    )
    _add_common(p)
    p.set_defaults(func=_cmd_evaluate)

    p = subparsers.add_parser("sweep", help="metric tables over lambda or anchor count")
    p.add_argument("--experiment", required=True, choices=["lambda", "n-anchors", "n_anchors"])
    p.add_argument("--values", required=True, help="comma-separated sweep values")
    p.add_argument("--ontology", required=True)
    p.add_argument("--mentions", required=True)
    p.add_argument("--store", help="cluster store (lambda sweep)")
    p.add_argument("--dump", help="anchor dump (n-anchors sweep)")
    p.add_argument(
        "--embedding-ref",
        action="store_true",
        help="mention embeddings are indices into the dump",
    )
    p.add_argument("--output", help="table output path (default stdout)")
    p.add_argument("--trigger-strategy", default=embedstore.STRATEGY_FULL)
    p.add_argument("--argument-strategy", default=embedstore.STRATEGY_MASKED)
    _add_inference_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err.parser.format_usage(), end="", file=sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    _setup_logging(args.json_logs, args.verbose)
    try:
        return args.func(args)
    except (
        OSError,
        ValueError,
        KeyError,
        OntologyError,
        DumpFormatError,
        MentionFormatError,
        evaluation.InsufficientAnchorsError,
        filtering.UncalibratedClusterError,
        inference.InferenceError,
    ) as err:
        log.error("%s", err)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
