"""Zero-shot event typing: nearest-centroid label matching over contextualized
anchor-embedding clusters, regularized by exact constrained (ILP) inference,
with out-of-ontology filtering and an evaluation harness."""

from .embedstore import (
    AnchorRecord,
    ClusterStore,
    DumpFormatError,
    LabelCluster,
    build_cluster,
    build_store,
    cosine_distance,
    cosine_similarity,
    load_dump,
    load_store,
    write_dump,
    write_store,
)
from .evaluation import HitReport, PRF1Report, hit_at_k, prf1, subsample_anchors, sweep
from .filtering import RadiusCalibration, accept_trigger, calibrate_radius, calibrate_store
from .inference import (
    InferenceConfig,
    InfeasibleError,
    TypedEvent,
    brute_force_solve,
    solve,
)
from .mentions import ArgumentMention, EventMention, Span, load_mentions, write_mentions
from .ontology import (
    EntityType,
    EventType,
    Ontology,
    OntologyError,
    RESERVED_NONE_ROLE,
    RoleType,
    load_ontology,
    ontology_from_dict,
    ontology_to_dict,
)
from .scoring import ScoreMatrix, rank, score_event

__version__ = "0.1.0"

__all__ = [
    "AnchorRecord",
    "ArgumentMention",
    "ClusterStore",
    "DumpFormatError",
    "EntityType",
    "EventMention",
    "EventType",
    "HitReport",
    "InferenceConfig",
    "InfeasibleError",
    "LabelCluster",
    "Ontology",
    "OntologyError",
    "PRF1Report",
    "RESERVED_NONE_ROLE",
    "RadiusCalibration",
    "RoleType",
    "ScoreMatrix",
    "Span",
    "TypedEvent",
    "accept_trigger",
    "brute_force_solve",
    "build_cluster",
    "build_store",
    "calibrate_radius",
    "calibrate_store",
    "cosine_distance",
    "cosine_similarity",
    "hit_at_k",
    "load_dump",
    "load_mentions",
    "load_ontology",
    "load_store",
    "ontology_from_dict",
    "ontology_to_dict",
    "prf1",
    "rank",
    "score_event",
    "solve",
    "subsample_anchors",
    "sweep",
    "write_dump",
    "write_mentions",
    "write_store",
]
