"""Prediction scores against a cluster store, and ranked candidate lists.

A trigger is scored against every trigger-cluster centroid by cosine
similarity; each argument is scored against every argument-cluster centroid.
Raw rankings over these scores are the pre-regularization predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .embedstore import ClusterStore, cosine_similarity
from .mentions import EventMention


@dataclass
class ScoreMatrix:
    """Per-event scores: trigger vs event types, each argument vs role types."""

    trigger_scores: dict[str, float]
    argument_scores: list[dict[str, float]] = field(default_factory=list)


def score_event(event: EventMention, store: ClusterStore) -> ScoreMatrix:
    """Cosine similarity of the trigger/argument embeddings to every centroid."""
    trigger_scores = {
        label: cosine_similarity(event.trigger_embedding, cluster.centroid)
        for label, cluster in store.trigger_clusters.items()
    }
    argument_scores = [
        {
            label: cosine_similarity(arg.embedding, cluster.centroid)
            for label, cluster in store.argument_clusters.items()
        }
        for arg in event.arguments
    ]
    return ScoreMatrix(trigger_scores=trigger_scores, argument_scores=argument_scores)


def rank(scores: dict[str, float], k: int) -> list[tuple[str, float]]:
    """Top-k (id, score) pairs by descending score; ties broken by id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[: min(k, len(ordered))]
