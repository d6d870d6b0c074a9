"""Out-of-ontology trigger filtering via per-cluster radius calibration.

Each label cluster gets a cosine-distance radius chosen to maximize F1 of
"member iff distance < radius" over its own anchor embeddings (positives)
versus the anchor embeddings of every other label (negatives). A trigger is
accepted only when its nearest cluster is in the target ontology and the
trigger falls inside that cluster's radius.

The threshold sweep is exact and finite: between two consecutive observed
distances every threshold yields the same confusion counts, so candidate
radii are the midpoints of consecutive distinct observed distances plus the
domain endpoints 0 and 2. F1 values are compared as exact rationals; ties
break toward the smaller (stricter) radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .embedstore import ClusterStore, LabelCluster, cosine_distance, cosine_similarity


class UncalibratedClusterError(Exception):
    pass


@dataclass
class RadiusCalibration:
    label_id: str
    radius: float
    f1_at_radius: float
    positives_count: int
    negatives_count: int


def _f1(tp: int, fp: int, fn: int) -> Fraction:
    denom = 2 * tp + fp + fn
    return Fraction(2 * tp, denom) if denom else Fraction(0)


def calibrate_radius(cluster: LabelCluster, negatives: list[np.ndarray]) -> RadiusCalibration:
    """Radius maximizing F1 of the predicate distance(v, centroid) < radius.

    Positives are the cluster's own members; `negatives` are anchor vectors
    of other labels. The optimum over all of [0, 2] is attained on the finite
    candidate set, so the sweep is exhaustive.
    """
    if not len(negatives):
        raise ValueError(f"cluster {cluster.label_id!r}: negatives must be nonempty")
    pos = [cosine_distance(v, cluster.centroid) for v in cluster.members]
    neg = [cosine_distance(v, cluster.centroid) for v in negatives]
    observed = sorted(set(pos) | set(neg))
    candidates = {0.0, 2.0}
    candidates.update((a + b) / 2.0 for a, b in zip(observed, observed[1:]))

    best_radius = 0.0
    best_f1 = Fraction(-1)
    for radius in sorted(candidates):
        tp = sum(1 for d in pos if d < radius)
        fp = sum(1 for d in neg if d < radius)
        f1 = _f1(tp, fp, len(pos) - tp)
        if f1 > best_f1:
            best_f1 = f1
            best_radius = radius
    return RadiusCalibration(
        label_id=cluster.label_id,
        radius=best_radius,
        f1_at_radius=float(best_f1),
        positives_count=len(pos),
        negatives_count=len(neg),
    )


def calibrate_store(
    store: ClusterStore, extra_negatives: list | None = None
) -> dict[str, RadiusCalibration]:
    """Calibrate every cluster in the store, writing radii back in place.

    Negatives for label X are the member vectors of every other label in the
    store (trigger and argument clusters alike) plus any `extra_negatives`
    anchor records whose label differs from X.
    """
    extra = list(extra_negatives) if extra_negatives else []
    clusters = {**store.trigger_clusters, **store.argument_clusters}
    report: dict[str, RadiusCalibration] = {}
    for label in sorted(clusters):
        negatives = [
            vec
            for other, cl in clusters.items()
            if other != label
            for vec in cl.members
        ]
        negatives.extend(rec.vector for rec in extra if rec.label_id != label)
        calibration = calibrate_radius(clusters[label], negatives)
        clusters[label].radius = calibration.radius
        report[label] = calibration
    return report


def accept_trigger(
    trigger_embedding: np.ndarray, store: ClusterStore, in_ontology: set[str]
) -> str | None:
    """Nearest trigger type if it is in-ontology and within radius, else None.

    The argmax runs over every trigger cluster in the store, which may
    include types outside the target ontology; a trigger whose nearest
    cluster is such a type is rejected outright.
    """
    if not store.trigger_clusters:
        raise ValueError("store has no trigger clusters")
    for label, cluster in store.trigger_clusters.items():
        if cluster.radius is None:
            raise UncalibratedClusterError(f"cluster {label!r} has no calibrated radius")
    best = min(
        store.trigger_clusters,
        key=lambda label: (
            -cosine_similarity(trigger_embedding, store.trigger_clusters[label].centroid),
            label,
        ),
    )
    if best not in in_ontology:
        return None
    cluster = store.trigger_clusters[best]
    if cosine_distance(trigger_embedding, cluster.centroid) < cluster.radius:
        return best
    return None
