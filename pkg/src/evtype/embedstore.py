"""Embedding vectors, label clusters, and the anchor dump / cluster store formats.

Vectors are stored as little-endian 32-bit floats on disk; all centroid and
score arithmetic runs in 64-bit. Scores follow the cosine SIMILARITY
convention (higher = better); cosine distance (1 - similarity) is used only
for radius comparisons in filtering.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO, Iterable

import numpy as np

from .ontology import Ontology

DUMP_FORMAT_VERSION = 1
DUMP_MAGIC = b"EVDP"
STORE_MAGIC = b"EVST"

STRATEGY_FULL = "full"
STRATEGY_MASKED = "masked"
_STRATEGIES = (STRATEGY_FULL, STRATEGY_MASKED)


class DumpFormatError(Exception):
    """Raised for malformed, truncated, or version-incompatible dump files."""


class ZeroVectorError(ValueError):
    """Cosine of a zero-norm vector is undefined; never silently reported as 0."""


def as_vector(values: Iterable[float], dtype=np.float32) -> np.ndarray:
    """Validate and convert raw values into an embedding vector."""
    vec = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=dtype)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError(f"embedding must be a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("embedding contains non-finite values")
    return vec


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1], computed in float64.

    Raises :class:`ZeroVectorError` on zero-norm input.
    """
    u64 = np.asarray(u, dtype=np.float64)
    v64 = np.asarray(v, dtype=np.float64)
    if u64.shape != v64.shape:
        raise ValueError(f"dimension mismatch: {u64.shape} vs {v64.shape}")
    nu = float(np.dot(u64, u64))
    nv = float(np.dot(v64, v64))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity of a zero vector is undefined")
    sim = float(np.dot(u64, v64)) / math.sqrt(nu * nv)
    return min(1.0, max(-1.0, sim))


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine distance 1 - similarity, in [0, 2]."""
    return 1.0 - cosine_similarity(u, v)


@dataclass
class AnchorRecord:
    """One contextualized anchor embedding for a label."""

    label_id: str
    anchor_word: str
    sentence_id: str
    strategy: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        self.vector = as_vector(self.vector)

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


def _exact_mean(members: np.ndarray) -> np.ndarray:
    # fsum per component: exactly-rounded and permutation-invariant.
    cols = members.astype(np.float64, copy=False)
    n = cols.shape[0]
    return np.array([math.fsum(cols[:, j]) / n for j in range(cols.shape[1])], dtype=np.float64)


@dataclass
class LabelCluster:
    """Cluster of anchor embeddings representing one label.

    ``centroid`` is the exact componentwise mean of ``members``; ``radius``
    (cosine-distance units, in [0, 2]) is unset until calibration.
    """

    label_id: str
    members: np.ndarray  # shape (n, dim), float32, input order preserved
    centroid: np.ndarray = field(init=False)
    radius: float | None = None

    def __post_init__(self) -> None:
        members = np.asarray(self.members, dtype=np.float32)
        if members.ndim != 2 or members.shape[0] < 1:
            raise ValueError(f"cluster {self.label_id!r} needs at least one member vector")
        if not np.all(np.isfinite(members)):
            raise ValueError(f"cluster {self.label_id!r} has non-finite member values")
        self.members = members
        self.centroid = _exact_mean(members)
        if self.radius is not None and not (0.0 <= self.radius <= 2.0):
            raise ValueError(f"radius {self.radius} outside [0, 2]")

    @property
    def dim(self) -> int:
        return int(self.members.shape[1])

    @property
    def size(self) -> int:
        return int(self.members.shape[0])


def build_cluster(records: list[AnchorRecord]) -> LabelCluster:
    """Group anchor records for one label into a cluster with its centroid."""
    if not records:
        raise ValueError("cannot build a cluster from an empty record list")
    label = records[0].label_id
    dim = records[0].dim
    for rec in records:
        if rec.label_id != label:
            raise ValueError(f"mixed labels in cluster build: {label!r} vs {rec.label_id!r}")
        if rec.dim != dim:
            raise ValueError(f"mixed dims in cluster build for {label!r}: {dim} vs {rec.dim}")
    members = np.stack([rec.vector for rec in records])
    return LabelCluster(label_id=label, members=members)


@dataclass
class ClusterStore:
    """Trigger and argument clusters keyed by label id; uniform dimension."""

    trigger_clusters: dict[str, LabelCluster]
    argument_clusters: dict[str, LabelCluster]
    dim: int

    def __post_init__(self) -> None:
        for cluster in list(self.trigger_clusters.values()) + list(self.argument_clusters.values()):
            if cluster.dim != self.dim:
                raise ValueError(
                    f"cluster {cluster.label_id!r} has dim {cluster.dim}, store expects {self.dim}"
                )


def build_store(
    records: list[AnchorRecord],
    ontology: Ontology,
    *,
    trigger_strategy: str = STRATEGY_FULL,
    argument_strategy: str = STRATEGY_MASKED,
    allow_strategy_mismatch: bool = False,
    ignore_unknown_labels: bool = False,
) -> ClusterStore:
    """Build a ClusterStore whose keys exactly cover the ontology's type ids.

    Records are routed to trigger or argument clusters by whether their label
    id names an event type or a role type. Strategy conventions (full for
    triggers, masked for arguments) are enforced unless
    ``allow_strategy_mismatch`` is set (representation-strategy ablations).
    """
    if not records:
        raise ValueError("cannot build a store from an empty record list")
    dim = records[0].dim
    grouped: dict[str, list[AnchorRecord]] = {}
    for rec in records:
        if rec.dim != dim:
            raise ValueError(f"mixed dims in dump: {dim} vs {rec.dim} for {rec.label_id!r}")
        grouped.setdefault(rec.label_id, []).append(rec)

    triggers: dict[str, LabelCluster] = {}
    arguments: dict[str, LabelCluster] = {}
    for label, recs in grouped.items():
        if label in ontology.event_types:
            expected, dest = trigger_strategy, triggers
        elif label in ontology.role_types:
            expected, dest = argument_strategy, arguments
        elif ignore_unknown_labels:
            continue
        else:
            raise ValueError(f"dump label {label!r} is not an event or role type in the ontology")
        bad = sorted({r.strategy for r in recs if r.strategy != expected})
        if bad and not allow_strategy_mismatch:
            raise ValueError(
                f"label {label!r} has {bad[0]}-strategy records, expected {expected!r} "
                "(pass allow_strategy_mismatch for ablation dumps)"
            )
        dest[label] = build_cluster(recs)

    missing = [eid for eid in ontology.event_types if eid not in triggers]
    missing += [rid for rid in ontology.role_types if rid not in arguments]
    if missing:
        raise ValueError(f"dump has no anchor records for: {', '.join(sorted(missing))}")
    return ClusterStore(trigger_clusters=triggers, argument_clusters=arguments, dim=dim)


# ---------------------------------------------------------------------------
# Dump format v1. Binary: magic, length-prefixed JSON header, then per record
# a length-prefixed JSON metadata preamble followed by dim little-endian
# float32 values. Text: JSON header line, then one JSON record per line with
# the vector as a decimal array.
# ---------------------------------------------------------------------------


def _strategy_default(records: list[AnchorRecord]) -> str:
    strategies = {rec.strategy for rec in records}
    if len(strategies) == 1:
        return strategies.pop()
    return "mixed"


def _dump_header(records: list[AnchorRecord], dim: int) -> dict[str, Any]:
    return {
        "format_version": DUMP_FORMAT_VERSION,
        "dim": dim,
        "count": len(records),
        "strategy_default": _strategy_default(records) if records else STRATEGY_FULL,
    }


def _records_dim(records: list[AnchorRecord]) -> int:
    if not records:
        return 0
    dim = records[0].dim
    for rec in records:
        if rec.dim != dim:
            raise DumpFormatError(f"mixed vector dims in records: {dim} vs {rec.dim}")
    return dim


def _write_block(fh: BinaryIO, payload: bytes) -> None:
    fh.write(struct.pack("<I", len(payload)))
    fh.write(payload)


def _read_block(fh: BinaryIO, what: str) -> bytes:
    raw = fh.read(4)
    if len(raw) != 4:
        raise DumpFormatError(f"truncated file: missing {what} length")
    (length,) = struct.unpack("<I", raw)
    payload = fh.read(length)
    if len(payload) != length:
        raise DumpFormatError(f"truncated file: incomplete {what}")
    return payload


def write_dump(records: list[AnchorRecord], path: str | Path, *, text: bool = False) -> None:
    """Write anchor records; binary by default, line-delimited JSON with ``text``."""
    path = Path(path)
    dim = _records_dim(records)
    header = _dump_header(records, dim)
    if text:
        with path.open("w", encoding="utf-8", newline="\n") as out:
            out.write(json.dumps(header) + "\n")
            for rec in records:
                out.write(
                    json.dumps(
                        {
                            "label_id": rec.label_id,
                            "anchor_word": rec.anchor_word,
                            "sentence_id": rec.sentence_id,
                            "strategy": rec.strategy,
                            "vector": [float(x) for x in rec.vector],
                        }
                    )
                    + "\n"
                )
        return
    with path.open("wb") as out:
        out.write(DUMP_MAGIC)
        _write_block(out, json.dumps(header).encode("utf-8"))
        for rec in records:
            meta = {
                "label_id": rec.label_id,
                "anchor_word": rec.anchor_word,
                "sentence_id": rec.sentence_id,
                "strategy": rec.strategy,
            }
            _write_block(out, json.dumps(meta).encode("utf-8"))
            out.write(rec.vector.astype("<f4").tobytes())


def _parse_header(doc: Any, *, expected_keys: tuple[str, ...] = ("dim", "count")) -> dict[str, Any]:
    if not isinstance(doc, dict):
        raise DumpFormatError("header is not a JSON object")
    version = doc.get("format_version")
    if version != DUMP_FORMAT_VERSION:
        raise DumpFormatError(f"unknown dump format_version {version!r}")
    for key in expected_keys:
        if key not in doc:
            raise DumpFormatError(f"header missing {key!r}")
    return doc


def _vector_from_list(values: Any, dim: int, where: str) -> np.ndarray:
    if not isinstance(values, list) or len(values) != dim:
        got = len(values) if isinstance(values, list) else type(values).__name__
        raise DumpFormatError(f"{where}: vector length {got} does not match header dim {dim}")
    vec = np.asarray(values, dtype=np.float32)
    if not np.all(np.isfinite(vec)):
        raise DumpFormatError(f"{where}: non-finite vector values")
    return vec


def load_dump(path: str | Path) -> list[AnchorRecord]:
    """Load anchor records from a binary or text dump (detected by magic bytes)."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic == DUMP_MAGIC:
            return _load_dump_binary(fh)
    return _load_dump_text(path)


def _load_dump_binary(fh: BinaryIO) -> list[AnchorRecord]:
    header = _parse_header(json.loads(_read_block(fh, "header").decode("utf-8")))
    dim, count = int(header["dim"]), int(header["count"])
    records: list[AnchorRecord] = []
    for i in range(count):
        meta = json.loads(_read_block(fh, f"record {i} metadata").decode("utf-8"))
        payload = fh.read(dim * 4)
        if len(payload) != dim * 4:
            raise DumpFormatError(
                f"record {i}: vector payload has {len(payload) // 4} floats, header dim is {dim}"
            )
        vec = np.frombuffer(payload, dtype="<f4").astype(np.float32)
        if not np.all(np.isfinite(vec)):
            raise DumpFormatError(f"record {i}: non-finite vector values")
        records.append(
            AnchorRecord(
                label_id=meta["label_id"],
                anchor_word=meta["anchor_word"],
                sentence_id=meta["sentence_id"],
                strategy=meta["strategy"],
                vector=vec,
            )
        )
    if fh.read(1):
        raise DumpFormatError("trailing bytes after last record")
    return records


def _load_dump_text(path: Path) -> list[AnchorRecord]:
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise DumpFormatError("empty file: missing header line")
        try:
            header = _parse_header(json.loads(first))
        except json.JSONDecodeError as exc:
            raise DumpFormatError(f"malformed header line: {exc}") from exc
        dim, count = int(header["dim"]), int(header["count"])
        records: list[AnchorRecord] = []
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DumpFormatError(f"record {i}: malformed JSON: {exc}") from exc
            vec = _vector_from_list(row.get("vector"), dim, f"record {i}")
            records.append(
                AnchorRecord(
                    label_id=row["label_id"],
                    anchor_word=row["anchor_word"],
                    sentence_id=row["sentence_id"],
                    strategy=row["strategy"],
                    vector=vec,
                )
            )
    if len(records) != count:
        raise DumpFormatError(f"header count {count} but {len(records)} records present")
    return records


# ---------------------------------------------------------------------------
# Cluster store file: same framing as dumps; per cluster a metadata preamble
# (label, kind, member count, radius) followed by the member vectors.
# Centroids are recomputed on load.
# ---------------------------------------------------------------------------


def write_store(store: ClusterStore, path: str | Path, *, text: bool = False) -> None:
    path = Path(path)
    header = {
        "format_version": DUMP_FORMAT_VERSION,
        "dim": store.dim,
        "trigger_count": len(store.trigger_clusters),
        "argument_count": len(store.argument_clusters),
    }
    entries = [("trigger", c) for _, c in sorted(store.trigger_clusters.items())]
    entries += [("argument", c) for _, c in sorted(store.argument_clusters.items())]
    if text:
        with path.open("w", encoding="utf-8", newline="\n") as out:
            out.write(json.dumps(header) + "\n")
            for kind, cluster in entries:
                out.write(
                    json.dumps(
                        {
                            "label_id": cluster.label_id,
                            "kind": kind,
                            "radius": cluster.radius,
                            "members": [[float(x) for x in row] for row in cluster.members],
                        }
                    )
                    + "\n"
                )
        return
    with path.open("wb") as out:
        out.write(STORE_MAGIC)
        _write_block(out, json.dumps(header).encode("utf-8"))
        for kind, cluster in entries:
            meta = {
                "label_id": cluster.label_id,
                "kind": kind,
                "member_count": cluster.size,
                "radius": cluster.radius,
            }
            _write_block(out, json.dumps(meta).encode("utf-8"))
            out.write(cluster.members.astype("<f4").tobytes())


def load_store(path: str | Path) -> ClusterStore:
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
        if magic == STORE_MAGIC:
            return _load_store_binary(fh)
    return _load_store_text(path)


def _store_from_entries(
    header: dict[str, Any], entries: list[tuple[str, str, float | None, np.ndarray]]
) -> ClusterStore:
    dim = int(header["dim"])
    triggers: dict[str, LabelCluster] = {}
    arguments: dict[str, LabelCluster] = {}
    for label, kind, radius, members in entries:
        cluster = LabelCluster(label_id=label, members=members, radius=radius)
        if kind == "trigger":
            triggers[label] = cluster
        elif kind == "argument":
            arguments[label] = cluster
        else:
            raise DumpFormatError(f"cluster {label!r}: unknown kind {kind!r}")
    if len(triggers) != int(header["trigger_count"]) or len(arguments) != int(
        header["argument_count"]
    ):
        raise DumpFormatError("cluster counts do not match header")
    return ClusterStore(trigger_clusters=triggers, argument_clusters=arguments, dim=dim)


def _load_store_binary(fh: BinaryIO) -> ClusterStore:
    header = _parse_header(
        json.loads(_read_block(fh, "header").decode("utf-8")),
        expected_keys=("dim", "trigger_count", "argument_count"),
    )
    dim = int(header["dim"])
    total = int(header["trigger_count"]) + int(header["argument_count"])
    entries = []
    for i in range(total):
        meta = json.loads(_read_block(fh, f"cluster {i} metadata").decode("utf-8"))
        n = int(meta["member_count"])
        payload = fh.read(n * dim * 4)
        if len(payload) != n * dim * 4:
            raise DumpFormatError(f"cluster {i}: truncated member vectors")
        members = np.frombuffer(payload, dtype="<f4").reshape(n, dim).astype(np.float32)
        entries.append((meta["label_id"], meta["kind"], meta.get("radius"), members))
    if fh.read(1):
        raise DumpFormatError("trailing bytes after last cluster")
    return _store_from_entries(header, entries)


def _load_store_text(path: Path) -> ClusterStore:
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise DumpFormatError("empty file: missing header line")
        header = _parse_header(
            json.loads(first), expected_keys=("dim", "trigger_count", "argument_count")
        )
        dim = int(header["dim"])
        entries = []
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            row = json.loads(line)
            raw = row.get("members")
            if not isinstance(raw, list) or not raw:
                raise DumpFormatError(f"cluster {i}: missing members")
            members = np.stack([_vector_from_list(v, dim, f"cluster {i}") for v in raw])
            entries.append((row["label_id"], row["kind"], row.get("radius"), members))
    return _store_from_entries(header, entries)
