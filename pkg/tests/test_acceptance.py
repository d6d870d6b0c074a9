"""Acceptance gate for the typing engine.

One test per guaranteed property. Each prints a single line

    ACCEPTANCE <property>: PASS|FAIL (supporting counts)

so a log scan shows the status of every guarantee at a glance. Checks use
independent oracles (exhaustive enumeration, prefix-sweep threshold search,
hand-computed values) rather than the production code paths they validate.
"""

from __future__ import annotations

import itertools
import json
import os
import random
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from evtype.embedstore import (
    AnchorRecord,
    LabelCluster,
    build_store,
    cosine_distance,
    load_dump,
    write_dump,
)
from evtype.evaluation import hit_at_k, prf1
from evtype.filtering import calibrate_radius
from evtype.inference import InfeasibleError, InferenceConfig, brute_force_solve, solve
from evtype.mentions import ArgumentMention, EventMention, Span, load_mentions, write_mentions
from evtype.scoring import rank, score_event

from helpers import check_typed_event, quick_ontology, random_instance

FIXTURES = Path(__file__).parent / "fixtures"

CONFIG_POOL = [
    InferenceConfig(),
    InferenceConfig(lam=0.1),
    InferenceConfig(enforce_distinct_roles=False),
    InferenceConfig(allow_unassigned_arguments=True),
    InferenceConfig(lam=3.0, enforce_distinct_roles=False, allow_unassigned_arguments=True),
]


def report(name: str, failures: list[str], detail: str = "") -> None:
    ok = not failures
    if ok:
        suffix = f" ({detail})" if detail else ""
    else:
        more = f"; +{len(failures) - 1} more" if len(failures) > 1 else ""
        suffix = f" ({failures[0]}{more})"
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{suffix}", flush=True)
    assert ok, "\n".join(failures)


# ---------------------------------------------------------------------------
# 1. Solver equals the exhaustive oracle on random instances.


def test_solver_oracle_equivalence():
    rng = random.Random(2024)
    failures: list[str] = []
    solved = infeasible = 0
    n_instances = 1000
    start = time.perf_counter()
    for i in range(n_instances):
        # Quantized scores every few instances force exact objective ties, so
        # the comparison also exercises tie-breaking.
        onto, event, scores = random_instance(rng, quantize=(i % 4 == 0))
        config = CONFIG_POOL[i % len(CONFIG_POOL)]
        try:
            typed = solve(event, scores, onto, config)
        except InfeasibleError as solver_err:
            infeasible += 1
            try:
                brute_force_solve(event, scores, onto, config)
                failures.append(f"instance {i}: solver infeasible but oracle solved")
            except InfeasibleError as oracle_err:
                if str(oracle_err) != str(solver_err):
                    failures.append(f"instance {i}: infeasibility diagnoses differ")
            continue
        oracle = brute_force_solve(event, scores, onto, config)
        same = (
            typed.trigger_type == oracle.trigger_type
            and typed.argument_roles == oracle.argument_roles
            and typed.objective_value == oracle.objective_value
        )
        if not same:
            failures.append(
                f"instance {i}: solver ({typed.trigger_type}, {typed.argument_roles}) "
                f"!= oracle ({oracle.trigger_type}, {oracle.argument_roles})"
            )
        solved += 1
    elapsed = time.perf_counter() - start
    if elapsed >= 10.0:
        failures.append(f"runtime {elapsed:.2f}s exceeds the 10s budget")
    report(
        "solver-oracle-equivalence",
        failures,
        f"{n_instances} instances, {solved} solved / {infeasible} infeasible, {elapsed:.2f}s",
    )


# ---------------------------------------------------------------------------
# 2. Every solver output satisfies the constraint system.


def test_constraint_satisfaction():
    rng = random.Random(4096)
    failures: list[str] = []
    checked = 0
    for i in range(1000):
        onto, event, scores = random_instance(rng, quantize=(i % 5 == 0))
        config = CONFIG_POOL[i % len(CONFIG_POOL)]
        try:
            typed = solve(event, scores, onto, config)
        except InfeasibleError:
            continue
        violations = check_typed_event(typed, event, scores, onto, config)
        if violations:
            failures.append(f"instance {i}: {violations[0]}")
        checked += 1
    report(
        "constraint-satisfaction",
        failures,
        f"{checked} solver outputs validated against an independent checker, 0 violations",
    )


# ---------------------------------------------------------------------------
# 3. The trigger weight dominates in both limits.


def _max_argument_sum(event, scores, ontology, trigger, config) -> Fraction | None:
    """Exhaustive best argument sum for a fixed trigger; None if infeasible.

    Independent of the solver: plain product enumeration with the constraint
    definitions applied directly.
    """
    roles_e = ontology.event_types[trigger].roles
    domains = []
    for j in range(event.m):
        options = [
            r
            for r in roles_e
            if ontology.entity_admissible(r, event.arguments[j].entity_type)
        ]
        if not options:
            return None
        domains.append(options)
    best: Fraction | None = None
    for combo in itertools.product(*domains):
        if config.enforce_distinct_roles and len(set(combo)) != len(combo):
            continue
        total = sum(
            (Fraction(scores.argument_scores[j][r]) for j, r in enumerate(combo)),
            Fraction(0),
        )
        if best is None or total > best:
            best = total
    return best


def test_lambda_dominance():
    rng = random.Random(31)
    config = InferenceConfig()
    instances = []
    while len(instances) < 100:
        onto, event, scores = random_instance(rng, quantize=True)
        if event.m == 0:
            continue
        top_score = max(scores.trigger_scores.values())
        leaders = [e for e, v in scores.trigger_scores.items() if v == top_score]
        if len(leaders) != 1:
            continue  # the raw argmax must be unambiguous
        argmax = leaders[0]
        if _max_argument_sum(event, scores, onto, argmax, config) is None:
            continue  # feasible-at-argmax instances only
        instances.append((onto, event, scores, argmax))

    failures: list[str] = []
    argmax_hits = 0
    for i, (onto, event, scores, argmax) in enumerate(instances):
        big = solve(event, scores, onto, InferenceConfig(lam=1e6))
        if big.trigger_type == argmax:
            argmax_hits += 1
        else:
            failures.append(
                f"instance {i}: lambda=1e6 chose {big.trigger_type}, raw argmax {argmax}"
            )
        small = solve(event, scores, onto, InferenceConfig(lam=1e-6))
        sums = {
            e: _max_argument_sum(event, scores, onto, e, config)
            for e in onto.event_types
        }
        feasible = {e: s for e, s in sums.items() if s is not None}
        best_sum = max(feasible.values())
        if feasible.get(small.trigger_type) != best_sum:
            failures.append(
                f"instance {i}: lambda=1e-6 chose {small.trigger_type} with argument "
                f"sum {feasible.get(small.trigger_type)}, best is {best_sum}"
            )
    report(
        "lambda-dominance",
        failures,
        f"lambda=1e6 matched the raw argmax {argmax_hits}/100; "
        f"lambda=1e-6 maximized the argument sum 100/100",
    )


# ---------------------------------------------------------------------------
# 4. Nearest-centroid recovery on a 33-trigger / 22-role synthetic fixture,
#    and joint inference never hurts argument accuracy under injected
#    entity-constraint conflicts.

RECOVERY_DIM = 60
RECOVERY_TRIGGERS = [f"E{i:02d}" for i in range(33)]
RECOVERY_ROLES = [f"R{i:02d}" for i in range(22)]
RECOVERY_BASIS = {
    label: i for i, label in enumerate(RECOVERY_TRIGGERS + RECOVERY_ROLES)
}
# Roles R16..R21 admit only LOC entities; the rest are unconstrained.
LOCATIVE_ROLES = set(RECOVERY_ROLES[16:])


def _recovery_ontology():
    roles = {r: (("LOC",) if r in LOCATIVE_ROLES else ()) for r in RECOVERY_ROLES}
    events = {}
    for i, e in enumerate(RECOVERY_TRIGGERS):
        events[e] = (
            RECOVERY_ROLES[i % 16],
            RECOVERY_ROLES[(i + 1) % 16],
            RECOVERY_ROLES[16 + i % 6],
        )
    return quick_ontology(events, roles, ("PER", "LOC"))


def _recovery_vector(label: str, rng: random.Random, sigma: float = 0.02) -> np.ndarray:
    vec = np.array([rng.gauss(0.0, sigma) for _ in range(RECOVERY_DIM)])
    vec[RECOVERY_BASIS[label]] += 1.0
    return vec


def _recovery_store(onto):
    rng = random.Random(4242)
    records = []
    for label in RECOVERY_TRIGGERS + RECOVERY_ROLES:
        strategy = "full" if label.startswith("E") else "masked"
        for s in range(4):
            records.append(
                AnchorRecord(
                    label_id=label,
                    anchor_word=label.lower(),
                    sentence_id=f"{label}-s{s}",
                    strategy=strategy,
                    vector=_recovery_vector(label, rng).astype(np.float32),
                )
            )
    return build_store(records, onto)


def _recovery_corpus(onto, rng: random.Random, n_events: int, conflict_rate: float):
    """Synthetic mentions; a conflicted event's first argument mixes in a
    dominant decoy role that its entity type cannot fill."""
    events = []
    n_conflicts = 0
    for i in range(n_events):
        gold_type = rng.choice(RECOVERY_TRIGGERS)
        roles_e = onto.event_types[gold_type].roles  # (open, open, locative)
        conflicted = conflict_rate > 0 and rng.random() < conflict_rate
        if conflicted:
            m = rng.randint(1, 2)
            gold_roles = rng.sample(list(roles_e[:2]), m)
        else:
            m = rng.randint(0, 3)
            gold_roles = rng.sample(list(roles_e), m)
        sentence = f"sent{i}"
        arguments = []
        for j, role in enumerate(gold_roles):
            embedding = _recovery_vector(role, rng)
            entity = "LOC" if role in LOCATIVE_ROLES else "PER"
            if conflicted and j == 0:
                decoy = roles_e[2]
                embedding = (
                    0.75 * _recovery_vector(decoy, rng) + 0.5 * _recovery_vector(role, rng)
                )
                n_conflicts += 1
            arguments.append(
                ArgumentMention(
                    span=Span(sentence_id=sentence, start=2 + 2 * j, end=3 + 2 * j, text=f"a{j}"),
                    embedding=embedding,
                    entity_type=entity,
                    gold_role=role,
                )
            )
        events.append(
            EventMention(
                event_id=f"ev{i}",
                trigger=Span(sentence_id=sentence, start=0, end=1, text="t"),
                trigger_embedding=_recovery_vector(gold_type, rng),
                arguments=arguments,
                gold_type=gold_type,
            )
        )
    return events, n_conflicts


def _recovery_hits(events, store, onto, use_ilp: bool):
    config = InferenceConfig()
    trigger_hits = arg_hits = arg_total = 0
    for event in events:
        scores = score_event(event, store)
        if use_ilp:
            typed = solve(event, scores, onto, config)
            trigger_hits += typed.trigger_type == event.gold_type
            assigned = typed.argument_roles
        else:
            trigger_hits += rank(scores.trigger_scores, 1)[0][0] == event.gold_type
            assigned = [
                rank(scores.argument_scores[j], 1)[0][0] for j in range(event.m)
            ]
        for j, arg in enumerate(event.arguments):
            arg_hits += assigned[j] == arg.gold_role
            arg_total += 1
    trigger_rate = trigger_hits / len(events)
    arg_rate = arg_hits / arg_total if arg_total else None
    return trigger_rate, arg_rate


def test_nearest_centroid_recovery():
    onto = _recovery_ontology()
    store = _recovery_store(onto)
    failures: list[str] = []

    clean, _ = _recovery_corpus(onto, random.Random(100), 40, conflict_rate=0.0)
    trigger_rate, arg_rate = _recovery_hits(clean, store, onto, use_ilp=False)
    if trigger_rate != 1.0:
        failures.append(f"clean corpus trigger hit@1 {trigger_rate} != 1.0")
    if arg_rate != 1.0:
        failures.append(f"clean corpus argument hit@1 {arg_rate} != 1.0")

    improved = equal = 0
    for seed in range(10):
        corpus, n_conflicts = _recovery_corpus(
            onto, random.Random(1000 + seed), 40, conflict_rate=0.2
        )
        _, raw_arg = _recovery_hits(corpus, store, onto, use_ilp=False)
        _, ilp_arg = _recovery_hits(corpus, store, onto, use_ilp=True)
        if ilp_arg < raw_arg:
            failures.append(f"seed {seed}: ILP argument hit@1 {ilp_arg} < raw {raw_arg}")
        elif ilp_arg > raw_arg:
            improved += 1
        else:
            equal += 1
        if n_conflicts > 0 and ilp_arg <= raw_arg:
            failures.append(
                f"seed {seed}: {n_conflicts} conflicts but no strict improvement"
            )
    report(
        "nearest-centroid-recovery",
        failures,
        f"33+22 orthogonal clusters: clean hit@1 1.0/1.0; with conflicts ILP "
        f"improved on {improved}/10 seeds, never worse",
    )


# ---------------------------------------------------------------------------
# 5. Radius calibration matches an exhaustive threshold sweep.


def _sweep_oracle(pos: list[float], neg: list[float]) -> tuple[Fraction, float]:
    """Best F1 over all thresholds by ascending prefix counting; returns the
    optimum and the smallest representative threshold achieving it."""
    points = sorted([(d, True) for d in pos] + [(d, False) for d in neg])
    total_pos = len(pos)

    def f1_at(tp: int, fp: int) -> Fraction:
        denom = 2 * tp + fp + (total_pos - tp)
        return Fraction(2 * tp, denom) if denom else Fraction(0)

    best = (f1_at(0, 0), 0.0)
    tp = fp = 0
    i = 0
    while i < len(points):
        d = points[i][0]
        while i < len(points) and points[i][0] == d:
            if points[i][1]:
                tp += 1
            else:
                fp += 1
            i += 1
        threshold = (d + points[i][0]) / 2.0 if i < len(points) else 2.0
        f1 = f1_at(tp, fp)
        if f1 > best[0]:
            best = (f1, threshold)
    return best


def _gap_index(threshold: float, observed: list[float]) -> int:
    return sum(1 for d in observed if d < threshold)


def test_radius_calibration():
    failures: list[str] = []
    rng = random.Random(77)

    # Separable: orthogonal centers, tight spread.
    dim = 12
    clusters = []
    for i in range(8):
        center = np.zeros(dim)
        center[i] = 1.0
        members = [
            center + np.array([rng.uniform(-0.02, 0.02) for _ in range(dim)])
            for _ in range(8)
        ]
        clusters.append(LabelCluster(label_id=f"L{i}", members=np.asarray(members, dtype=np.float32)))
    separable_perfect = 0
    for i, cluster in enumerate(clusters):
        negatives = [v for k, other in enumerate(clusters) if k != i for v in other.members]
        cal = calibrate_radius(cluster, negatives)
        pos_d = [cosine_distance(v, cluster.centroid) for v in cluster.members]
        neg_d = [cosine_distance(v, cluster.centroid) for v in negatives]
        oracle_f1, oracle_threshold = _sweep_oracle(pos_d, neg_d)
        if cal.f1_at_radius != 1.0:
            failures.append(f"separable cluster {i}: F1 {cal.f1_at_radius} != 1.0")
        if cal.f1_at_radius != float(oracle_f1):
            failures.append(f"separable cluster {i}: F1 differs from sweep oracle")
        observed = sorted(set(pos_d + neg_d))
        if _gap_index(cal.radius, observed) != _gap_index(oracle_threshold, observed):
            failures.append(f"separable cluster {i}: radius not in the oracle's gap")
        separable_perfect += cal.f1_at_radius == 1.0

    # Non-separable: wide spread forces class overlap; exact optimum required.
    overlapping_matched = 0
    for trial in range(20):
        dim = 5
        center = np.array([rng.uniform(-1, 1) for _ in range(dim)])
        members = [
            center + np.array([rng.uniform(-0.8, 0.8) for _ in range(dim)])
            for _ in range(8)
        ]
        cluster = LabelCluster(label_id=f"T{trial}", members=np.asarray(members, dtype=np.float32))
        negatives = [
            center + np.array([rng.uniform(-0.9, 0.9) for _ in range(dim)])
            for _ in range(12)
        ]
        cal = calibrate_radius(cluster, negatives)
        pos_d = [cosine_distance(v, cluster.centroid) for v in cluster.members]
        neg_d = [cosine_distance(v, cluster.centroid) for v in negatives]
        oracle_f1, _ = _sweep_oracle(pos_d, neg_d)
        if cal.f1_at_radius != float(oracle_f1):
            failures.append(
                f"overlap trial {trial}: F1 {cal.f1_at_radius} != oracle {float(oracle_f1)}"
            )
        else:
            overlapping_matched += 1
    report(
        "radius-calibration",
        failures,
        f"{separable_perfect}/8 separable clusters at F1=1.0; "
        f"{overlapping_matched}/20 overlapping trials equal the sweep oracle",
    )


# ---------------------------------------------------------------------------
# 6. Metrics reproduce hand-computed values and hit@K is monotone in K.


def test_metrics_exactness():
    failures: list[str] = []

    predictions = [
        ["x1", "G1", "x2", "x3", "x4"],
        ["y1", "y2", "y3", "G2", "y4"],
    ]
    hit = hit_at_k(predictions, ["G1", "G2"]).hit_at
    if hit != {1: 0.0, 3: 0.5, 5: 1.0}:
        failures.append(f"golds at ranks 2 and 4: hit@K {hit} != {{1: 0.0, 3: 0.5, 5: 1.0}}")

    identity = prf1([("s", 0, 1, "A")], [("s", 0, 1, "A")])
    if (identity.precision, identity.recall, identity.f1) != (1.0, 1.0, 1.0):
        failures.append("identity prf1 not perfect")
    half = prf1([("s", 0, 1, "A"), ("s", 4, 5, "B")], [("s", 0, 1, "A"), ("s", 2, 3, "B")])
    if (half.precision, half.recall, half.f1) != (0.5, 0.5, 0.5):
        failures.append(f"half-correct prf1 {half.precision, half.recall, half.f1} != 0.5s")
    dup = prf1([("s", 0, 1, "A"), ("s", 0, 1, "A")], [("s", 0, 1, "A")])
    if (dup.tp, dup.fp, dup.fn) != (1, 1, 0) or dup.f1 != 2 / 3:
        failures.append("duplicate prediction must count one tp and one fp")

    rng = random.Random(8)
    labels = [f"L{i}" for i in range(10)]
    monotone = 0
    for _ in range(200):
        n = rng.randint(1, 15)
        ranked = [rng.sample(labels, rng.randint(1, len(labels))) for _ in range(n)]
        golds = [rng.choice(labels) for _ in range(n)]
        values = hit_at_k(ranked, golds, ks=(1, 2, 3, 5, 8)).hit_at
        series = [values[k] for k in sorted(values)]
        if series != sorted(series):
            failures.append(f"hit@K not monotone on fuzzed input: {series}")
        else:
            monotone += 1
    report(
        "metrics-exactness",
        failures,
        f"hand values exact; hit@K monotone on {monotone}/200 fuzzed rankings",
    )


# ---------------------------------------------------------------------------
# 7. Dump and mention files survive round trips, including empty files.


def _random_records(rng: random.Random, n: int, dim: int) -> list[AnchorRecord]:
    return [
        AnchorRecord(
            label_id=f"L{i % 5}",
            anchor_word=f"w{i % 3}",
            sentence_id=f"s{i}",
            strategy="full" if i % 2 == 0 else "masked",
            vector=np.array([rng.uniform(-2, 2) for _ in range(dim)], dtype=np.float32),
        )
        for i in range(n)
    ]


def _records_equal(a: list[AnchorRecord], b: list[AnchorRecord]) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if (x.label_id, x.anchor_word, x.sentence_id, x.strategy) != (
            y.label_id,
            y.anchor_word,
            y.sentence_id,
            y.strategy,
        ):
            return False
        if x.vector.tobytes() != y.vector.tobytes():
            return False
    return True


def _mention_corpus(rng: random.Random, n: int, dim: int) -> list[EventMention]:
    events = []
    for i in range(n):
        m = rng.randint(0, 3)
        sentence = f"s{i}"
        arguments = [
            ArgumentMention(
                span=Span(sentence_id=sentence, start=2 + 2 * j, end=3 + 2 * j, text=f"a{j}"),
                embedding=np.array([rng.uniform(-1, 1) for _ in range(dim)], dtype=np.float32),
                entity_type=rng.choice(["PER", "ORG", None]),
                gold_role=rng.choice([f"R{j}", None]),
            )
            for j in range(m)
        ]
        events.append(
            EventMention(
                event_id=f"ev{i}",
                trigger=Span(sentence_id=sentence, start=0, end=1, text="t"),
                trigger_embedding=np.array(
                    [rng.uniform(-1, 1) for _ in range(dim)], dtype=np.float32
                ),
                arguments=arguments,
                gold_type=rng.choice(["E1", None]),
            )
        )
    return events


def _mentions_equal(a: list[EventMention], b: list[EventMention]) -> bool:
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if (x.event_id, x.gold_type, x.trigger) != (y.event_id, y.gold_type, y.trigger):
            return False
        if x.trigger_embedding.tobytes() != y.trigger_embedding.tobytes():
            return False
        if len(x.arguments) != len(y.arguments):
            return False
        for p, q in zip(x.arguments, y.arguments):
            if (p.span, p.entity_type, p.gold_role) != (q.span, q.entity_type, q.gold_role):
                return False
            if p.embedding.tobytes() != q.embedding.tobytes():
                return False
    return True


def test_format_round_trips(tmp_path):
    failures: list[str] = []
    rng = random.Random(52)
    records = _random_records(rng, 30, 7)

    binary_1, binary_2 = tmp_path / "a.dump", tmp_path / "a2.dump"
    write_dump(records, binary_1)
    loaded = load_dump(binary_1)
    if not _records_equal(records, loaded):
        failures.append("binary dump round trip altered records")
    write_dump(loaded, binary_2)
    if binary_1.read_bytes() != binary_2.read_bytes():
        failures.append("rewriting a loaded binary dump is not byte-identical")

    text_1, text_2 = tmp_path / "a.txt", tmp_path / "a2.txt"
    write_dump(records, text_1, text=True)
    loaded_text = load_dump(text_1)
    if not _records_equal(records, loaded_text):
        failures.append("text dump round trip altered records")
    write_dump(loaded_text, text_2, text=True)
    if text_1.read_bytes() != text_2.read_bytes():
        failures.append("rewriting a loaded text dump is not byte-identical")

    for text in (False, True):
        empty = tmp_path / f"empty-{text}.dump"
        write_dump([], empty, text=text)
        if load_dump(empty) != []:
            failures.append(f"empty dump (text={text}) did not round trip")

    events = _mention_corpus(rng, 8, 5)
    mention_1, mention_2 = tmp_path / "m.jsonl", tmp_path / "m2.jsonl"
    write_mentions(events, mention_1)
    loaded_events = load_mentions(mention_1)
    if not _mentions_equal(events, loaded_events):
        failures.append("mention file round trip altered events")
    write_mentions(loaded_events, mention_2)
    if mention_1.read_bytes() != mention_2.read_bytes():
        failures.append("rewriting a loaded mention file is not byte-identical")

    empty_mentions = tmp_path / "empty.jsonl"
    write_mentions([], empty_mentions)
    if load_mentions(empty_mentions) != []:
        failures.append("empty mention file did not round trip")

    report(
        "format-round-trips",
        failures,
        "binary bit-exact, text value-exact, empty files round trip",
    )


# ---------------------------------------------------------------------------
# 8. classify output is byte-identical across runs and thread counts.


def _run_classify(out_path: Path, threads: int | None) -> tuple[int, str]:
    cmd = [
        sys.executable,
        "-m",
        "evtype.cli",
        "classify",
        "--ontology",
        str(FIXTURES / "ontology.json"),
        "--store",
        str(FIXTURES / "clusters.store"),
        "--mentions",
        str(FIXTURES / "mentions.jsonl"),
        "--output",
        str(out_path),
    ]
    if threads is not None:
        cmd += ["--threads", str(threads)]
    env = {k: v for k, v in os.environ.items() if not k.startswith("EVTYPE_")}
    result = subprocess.run(cmd, capture_output=True, text=True, env=env)
    return result.returncode, result.stderr


def test_classify_determinism(tmp_path):
    failures: list[str] = []
    outputs: dict[str, bytes] = {}
    runs = [("run1", None), ("run2", None), ("threads1", 1), ("threads4", 4), ("threads8", 8)]
    for name, threads in runs:
        out_path = tmp_path / f"{name}.jsonl"
        code, stderr = _run_classify(out_path, threads)
        if code != 0:
            failures.append(f"{name}: exit code {code}: {stderr.strip()[:200]}")
            continue
        outputs[name] = out_path.read_bytes()
    if len(outputs) == len(runs):
        reference = outputs["run1"]
        for name, data in outputs.items():
            if data != reference:
                failures.append(f"{name}: output differs from run1")
        golden = (FIXTURES / "golden_classify.jsonl").read_bytes()
        if reference != golden:
            failures.append("output differs from the checked-in golden file")
    report(
        "classify-determinism",
        failures,
        f"{len(runs)} runs (threads: default x2, 1, 4, 8) byte-identical and equal to the golden file",
    )
