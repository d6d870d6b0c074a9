"""Metrics harness: Hit@K over ranked labels, span P/R/F1, and sweeps.

Hit@K scores classification of already-identified mentions against one gold
label per item, optionally restricted to a subset of gold types (e.g. the
least-frequent types). P/R/F1 scores full pipelines by exact-boundary span
matching, either on spans alone (identification) or spans plus labels
(identification + classification).

All fractions are computed as exact rationals over integer counts, so
re-running a report is bit-identical.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .embedstore import AnchorRecord, ClusterStore, build_store
from .inference import InferenceConfig, solve
from .mentions import EventMention
from .ontology import Ontology
from .scoring import score_event

log = logging.getLogger(__name__)

STRATUM_TRIGGERS = "triggers"
STRATUM_ARGUMENTS = "arguments"
SUBSET_ALL = "all_types"
SUBSET_EVAL = "eval_subset"

EXPERIMENT_LAMBDA = "lambda"
EXPERIMENT_N_ANCHORS = "n_anchors"


class InsufficientAnchorsError(Exception):
    pass


@dataclass
class HitReport:
    hit_at: dict[int, float]
    n_items: int
    stratum: str
    subset: str


@dataclass
class PRF1Report:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


def hit_at_k(
    predictions: list[list[str]],
    golds: list[str],
    ks: tuple[int, ...] = (1, 3, 5),
    *,
    stratum: str = STRATUM_TRIGGERS,
    subset_filter: set[str] | None = None,
    known_labels: set[str] | None = None,
    strict: bool = False,
) -> HitReport:
    """Fraction of items whose gold label appears in the top K predictions.

    `subset_filter` restricts scoring to items whose gold is in the set.
    Golds outside `known_labels` raise under strict mode and are otherwise
    scored as given (they can still hit if a ranked list contains them).
    """
    if stratum not in (STRATUM_TRIGGERS, STRATUM_ARGUMENTS):
        raise ValueError(f"unknown stratum {stratum!r}")
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} ranked lists vs {len(golds)} golds")
    if any(k < 1 for k in ks):
        raise ValueError(f"ks must be positive: {sorted(ks)}")
    for i, ranked in enumerate(predictions):
        if len(set(ranked)) != len(ranked):
            raise ValueError(f"item {i}: ranked list contains duplicates")
    if known_labels is not None:
        for i, gold in enumerate(golds):
            if gold not in known_labels:
                if strict:
                    raise ValueError(f"item {i}: gold label {gold!r} not in ontology")
                log.warning("item %d: gold label %r not in ontology", i, gold)

    if subset_filter is None:
        items = list(zip(predictions, golds))
    else:
        items = [(p, g) for p, g in zip(predictions, golds) if g in subset_filter]
    if not items:
        raise ValueError("no items to score (empty input or subset filter excludes all golds)")

    hit_at = {
        k: float(Fraction(sum(1 for p, g in items if g in p[:k]), len(items)))
        for k in sorted(ks)
    }
    return HitReport(
        hit_at=hit_at,
        n_items=len(items),
        stratum=stratum,
        subset=SUBSET_ALL if subset_filter is None else SUBSET_EVAL,
    )


MODE_IDENTIFICATION = "identification"
MODE_IDENTIFICATION_CLASSIFICATION = "identification_plus_classification"

SpanItem = tuple[str, int, int, str]  # (sentence_id, start, end, label)


def prf1(
    predicted_items: list[SpanItem],
    gold_items: list[SpanItem],
    mode: str = MODE_IDENTIFICATION_CLASSIFICATION,
) -> PRF1Report:
    """Exact-boundary span matching with one-to-one (multiset) pairing.

    Identification mode matches on span only; the combined mode matches on
    span and label. Duplicate predictions beyond the gold multiplicity count
    as false positives.
    """
    if mode == MODE_IDENTIFICATION:
        key = lambda item: item[:3]
    elif mode == MODE_IDENTIFICATION_CLASSIFICATION:
        key = lambda item: item
    else:
        raise ValueError(f"unknown mode {mode!r}")

    pred_counts: dict[tuple, int] = {}
    for item in predicted_items:
        pred_counts[key(item)] = pred_counts.get(key(item), 0) + 1
    gold_counts: dict[tuple, int] = {}
    for item in gold_items:
        gold_counts[key(item)] = gold_counts.get(key(item), 0) + 1

    tp = sum(min(n, gold_counts.get(k, 0)) for k, n in pred_counts.items())
    fp = len(predicted_items) - tp
    fn = len(gold_items) - tp
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
    return PRF1Report(
        precision=float(precision), recall=float(recall), f1=float(f1), tp=tp, fp=fp, fn=fn
    )


# ---------------------------------------------------------------------------
# Experiment drivers


def subsample_anchors(records: list[AnchorRecord], n: int, seed: int) -> list[AnchorRecord]:
    """Keep n anchor sentences per (label, anchor word), sampled by seed.

    Sampling is independent of record order: each group is sorted by
    sentence id and sampled with its own derived seed.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    groups: dict[tuple[str, str], list[AnchorRecord]] = {}
    for rec in records:
        groups.setdefault((rec.label_id, rec.anchor_word), []).append(rec)
    chosen: set[tuple[str, str, int]] = set()
    for (label, word), members in groups.items():
        if len(members) < n:
            raise InsufficientAnchorsError(
                f"label {label!r} word {word!r} has {len(members)} anchors, need {n}"
            )
        ordered = sorted(members, key=lambda r: r.sentence_id)
        rng = random.Random(f"{seed}:{label}:{word}")
        for rec in rng.sample(ordered, n):
            chosen.add((label, word, rec.sentence_id))
    return [r for r in records if (r.label_id, r.anchor_word, r.sentence_id) in chosen]


def _classify_and_score(
    events: list[EventMention], store: ClusterStore, ontology: Ontology, config: InferenceConfig
) -> dict[str, object]:
    trigger_ranked: list[list[str]] = []
    trigger_golds: list[str] = []
    role_ranked: list[list[str]] = []
    role_golds: list[str] = []
    for event in events:
        scores = score_event(event, store)
        typed = solve(event, scores, ontology, config)
        if event.gold_type is not None:
            trigger_ranked.append([label for label, _ in typed.trigger_ranking])
            trigger_golds.append(event.gold_type)
        for arg, ranking in zip(event.arguments, typed.role_rankings):
            if arg.gold_role is not None:
                role_ranked.append([label for label, _ in ranking])
                role_golds.append(arg.gold_role)
    row: dict[str, object] = {
        "n_triggers": len(trigger_golds),
        "n_arguments": len(role_golds),
    }
    if trigger_golds:
        report = hit_at_k(trigger_ranked, trigger_golds, (1,), stratum=STRATUM_TRIGGERS)
        row["trigger_hit1"] = report.hit_at[1]
    if role_golds:
        report = hit_at_k(role_ranked, role_golds, (1,), stratum=STRATUM_ARGUMENTS)
        row["argument_hit1"] = report.hit_at[1]
    return row


def sweep(
    experiment: str,
    values: list,
    events: list[EventMention],
    ontology: Ontology,
    *,
    store: ClusterStore | None = None,
    records: list[AnchorRecord] | None = None,
    config: InferenceConfig | None = None,
    seed: int = 0,
    trigger_strategy: str = "full",
    argument_strategy: str = "masked",
) -> list[dict[str, object]]:
    """One metrics row per value: lambda sweeps vary the trigger weight on a
    fixed store; n_anchors sweeps rebuild the store from per-word subsamples
    of the supplied dump records."""
    config = config or InferenceConfig()
    rows = []
    if experiment == EXPERIMENT_LAMBDA:
        if store is None:
            raise ValueError("lambda sweep requires a cluster store")
        for value in values:
            row = _classify_and_score(events, store, ontology, replace(config, lam=float(value)))
            rows.append({"experiment": experiment, "value": value, **row})
    elif experiment == EXPERIMENT_N_ANCHORS:
        if records is None:
            raise ValueError("n_anchors sweep requires dump records")
        for value in values:
            subsampled = subsample_anchors(records, int(value), seed)
            swept_store = build_store(
                subsampled,
                ontology,
                trigger_strategy=trigger_strategy,
                argument_strategy=argument_strategy,
            )
            row = _classify_and_score(events, swept_store, ontology, config)
            rows.append({"experiment": experiment, "value": value, **row})
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    return rows
