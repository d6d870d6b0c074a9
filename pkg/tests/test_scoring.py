import random

import numpy as np
import pytest

from evtype.embedstore import ClusterStore, LabelCluster
from evtype.mentions import ArgumentMention, EventMention, Span
from evtype.scoring import rank, score_event


def cluster(label, vec):
    return LabelCluster(label_id=label, members=np.asarray([vec], dtype=np.float32))


def basis_store(n_triggers, n_roles, dim):
    # Orthonormal centroids: e_0 .. e_{n_triggers-1} for triggers, the next
    # n_roles basis vectors for roles.
    triggers = {}
    for i in range(n_triggers):
        v = np.zeros(dim)
        v[i] = 1.0
        triggers[f"E{i}"] = cluster(f"E{i}", v)
    arguments = {}
    for k in range(n_roles):
        v = np.zeros(dim)
        v[n_triggers + k] = 1.0
        arguments[f"R{k}"] = cluster(f"R{k}", v)
    return ClusterStore(trigger_clusters=triggers, argument_clusters=arguments, dim=dim)


def make_event(trigger_vec, arg_vecs):
    args = [
        ArgumentMention(
            span=Span(sentence_id="s1", start=2 + j, end=3 + j, text=f"a{j}"),
            embedding=np.asarray(v, dtype=np.float64),
        )
        for j, v in enumerate(arg_vecs)
    ]
    return EventMention(
        event_id="ev1",
        trigger=Span(sentence_id="s1", start=0, end=1, text="t"),
        trigger_embedding=np.asarray(trigger_vec, dtype=np.float64),
        arguments=args,
    )


def test_exact_centroid_match_is_unique_argmax():
    store = basis_store(3, 2, 8)
    event = make_event(store.trigger_clusters["E1"].centroid, [])
    scores = score_event(event, store)
    assert scores.trigger_scores["E1"] == 1.0
    assert all(v < 1.0 for k, v in scores.trigger_scores.items() if k != "E1")


def test_zero_arguments_give_empty_argument_scores():
    store = basis_store(2, 2, 8)
    scores = score_event(make_event([1.0] + [0.0] * 7, []), store)
    assert scores.argument_scores == []
    assert set(scores.trigger_scores) == {"E0", "E1"}


def test_orthonormal_basis_scores():
    # Five orthogonal unit centroids; a trigger equal to e_3 scores
    # (0, 0, 1, 0, 0) hand-derivably.
    store = basis_store(5, 1, 8)
    trigger = np.zeros(8)
    trigger[2] = 1.0
    scores = score_event(make_event(trigger, []), store)
    expected = {"E0": 0.0, "E1": 0.0, "E2": 1.0, "E3": 0.0, "E4": 0.0}
    assert scores.trigger_scores == expected


def test_every_argument_row_covers_all_roles():
    store = basis_store(2, 4, 8)
    arg = np.ones(8)
    scores = score_event(make_event([1.0] + [0.0] * 7, [arg, arg, arg]), store)
    assert len(scores.argument_scores) == 3
    for row in scores.argument_scores:
        assert set(row) == {"R0", "R1", "R2", "R3"}


def test_store_insertion_order_irrelevant():
    dim = 8
    rng = random.Random(5)
    vecs = {f"E{i}": [rng.uniform(-1, 1) for _ in range(dim)] for i in range(4)}
    stores = []
    for order in (list(vecs), list(reversed(list(vecs)))):
        triggers = {label: cluster(label, vecs[label]) for label in order}
        stores.append(
            ClusterStore(trigger_clusters=triggers, argument_clusters={}, dim=dim)
        )
    event = make_event([rng.uniform(-1, 1) for _ in range(dim)], [])
    assert score_event(event, stores[0]).trigger_scores == score_event(event, stores[1]).trigger_scores


def test_trigger_scale_invariance_preserves_ranks():
    store = basis_store(4, 1, 8)
    rng = random.Random(6)
    vec = np.array([rng.uniform(-1, 1) for _ in range(8)])
    base = score_event(make_event(vec, []), store)
    # Power-of-two scaling is exact in floating point: bit-identical scores.
    doubled = score_event(make_event(2.0 * vec, []), store)
    assert rank(base.trigger_scores, 4) == rank(doubled.trigger_scores, 4)
    # Arbitrary positive scaling preserves the ordering; values move only by
    # float32 storage rounding of the scaled embedding.
    scaled = score_event(make_event(3.5 * vec, []), store)
    assert [l for l, _ in rank(base.trigger_scores, 4)] == [
        l for l, _ in rank(scaled.trigger_scores, 4)
    ]
    for label, score in rank(scaled.trigger_scores, 4):
        assert score == pytest.approx(base.trigger_scores[label], abs=1e-6)


def test_rank_sorts_descending():
    assert rank({"A": 0.9, "B": 0.7, "C": 0.8}, 2) == [("A", 0.9), ("C", 0.8)]


def test_rank_breaks_ties_lexicographically():
    assert rank({"B": 0.5, "A": 0.5}, 1) == [("A", 0.5)]


def test_rank_k_beyond_size_gives_full_ordering():
    got = rank({"A": 0.1, "B": 0.3, "C": 0.2}, 10)
    assert got == [("B", 0.3), ("C", 0.2), ("A", 0.1)]


def test_rank_empty_map():
    assert rank({}, 3) == []


def test_rank_rejects_nonpositive_k():
    with pytest.raises(ValueError, match="k"):
        rank({"A": 1.0}, 0)
