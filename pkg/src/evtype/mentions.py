"""Data model and ingestion for pre-identified events with their embeddings.

Mention detection and SRL run upstream; this module only consumes their
output. Each event line carries a trigger span plus argument spans, either
with inline embedding vectors or with ``embedding_ref`` indices into a
sidecar anchor dump.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .embedstore import AnchorRecord, ClusterStore, as_vector
from .ontology import Ontology

log = logging.getLogger(__name__)


class MentionFormatError(Exception):
    """Raised when a mention file violates the documented schema."""


@dataclass(frozen=True)
class Span:
    """Token span within one sentence; ``start`` inclusive, ``end`` exclusive."""

    sentence_id: str
    start: int
    end: int
    text: str

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span [{self.start}, {self.end}) in {self.sentence_id!r}")
        if not self.text:
            raise ValueError(f"empty span text in {self.sentence_id!r}")


@dataclass
class ArgumentMention:
    span: Span
    embedding: np.ndarray
    entity_type: str | None = None
    gold_role: str | None = None

    def __post_init__(self) -> None:
        self.embedding = as_vector(self.embedding)


@dataclass
class EventMention:
    """One identified event: trigger plus ``m >= 0`` arguments, same sentence."""

    event_id: str
    trigger: Span
    trigger_embedding: np.ndarray
    arguments: list[ArgumentMention] = field(default_factory=list)
    gold_type: str | None = None

    def __post_init__(self) -> None:
        self.trigger_embedding = as_vector(self.trigger_embedding)
        for arg in self.arguments:
            if arg.span.sentence_id != self.trigger.sentence_id:
                raise ValueError(
                    f"event {self.event_id!r}: argument sentence {arg.span.sentence_id!r} "
                    f"differs from trigger sentence {self.trigger.sentence_id!r}"
                )

    @property
    def m(self) -> int:
        return len(self.arguments)


def _resolve_embedding(
    row: dict[str, Any], sidecar: list[AnchorRecord] | None, where: str
) -> np.ndarray:
    if "embedding" in row:
        return as_vector(row["embedding"])
    if "embedding_ref" in row:
        if sidecar is None:
            raise ValueError(f"{where}: embedding_ref requires a sidecar dump")
        ref = row["embedding_ref"]
        if not isinstance(ref, int) or not (0 <= ref < len(sidecar)):
            raise ValueError(f"{where}: embedding_ref {ref!r} out of range")
        return sidecar[ref].vector
    raise ValueError(f"{where}: needs either embedding or embedding_ref")


def _span_from(row: dict[str, Any], sentence_id: str, where: str) -> Span:
    try:
        return Span(
            sentence_id=sentence_id,
            start=int(row["start"]),
            end=int(row["end"]),
            text=str(row["text"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{where}: bad span: {exc}") from exc


def _check_gold(
    label: str | None, valid: set[str], what: str, event_id: str, strict: bool
) -> None:
    if label is None or label in valid:
        return
    msg = f"event {event_id!r}: gold {what} {label!r} not in ontology"
    if strict:
        raise MentionFormatError(msg)
    log.warning("%s", msg)


def load_mentions(
    path: str | Path,
    store: ClusterStore | None = None,
    *,
    sidecar: list[AnchorRecord] | None = None,
    ontology: Ontology | None = None,
    strict: bool = False,
) -> list[EventMention]:
    """Load events from a line-delimited mention file, preserving input order.

    Embedding dimensions are checked against ``store`` when given. Gold labels
    missing from ``ontology`` warn by default and raise under ``strict``.
    """
    path = Path(path)
    events: list[EventMention] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MentionFormatError(f"line {lineno}: malformed JSON: {exc}") from exc
            try:
                event = _event_from_row(row, sidecar)
            except (KeyError, TypeError, ValueError) as exc:
                event_id = row.get("event_id", "?") if isinstance(row, dict) else "?"
                raise MentionFormatError(f"line {lineno} (event {event_id!r}): {exc}") from exc
            if store is not None:
                _check_dims(event, store.dim)
            if ontology is not None:
                _check_gold(event.gold_type, set(ontology.event_types), "type", event.event_id, strict)
                for arg in event.arguments:
                    _check_gold(arg.gold_role, set(ontology.role_types), "role", event.event_id, strict)
            events.append(event)
    return events


def _event_from_row(row: dict[str, Any], sidecar: list[AnchorRecord] | None) -> EventMention:
    event_id = str(row["event_id"])
    sentence_id = str(row["sentence_id"])
    trig = row["trigger"]
    trigger_span = _span_from(trig, sentence_id, "trigger")
    trigger_vec = _resolve_embedding(trig, sidecar, "trigger")
    arguments = []
    for j, arg in enumerate(row.get("arguments", [])):
        span = _span_from(arg, sentence_id, f"argument {j}")
        vec = _resolve_embedding(arg, sidecar, f"argument {j}")
        arguments.append(
            ArgumentMention(
                span=span,
                embedding=vec,
                entity_type=arg.get("entity_type"),
                gold_role=arg.get("gold_role"),
            )
        )
    return EventMention(
        event_id=event_id,
        trigger=trigger_span,
        trigger_embedding=trigger_vec,
        arguments=arguments,
        gold_type=trig.get("gold_type"),
    )


def _check_dims(event: EventMention, dim: int) -> None:
    if event.trigger_embedding.shape[0] != dim:
        raise MentionFormatError(
            f"event {event.event_id!r}: trigger embedding dim "
            f"{event.trigger_embedding.shape[0]} does not match store dim {dim}"
        )
    for j, arg in enumerate(event.arguments):
        if arg.embedding.shape[0] != dim:
            raise MentionFormatError(
                f"event {event.event_id!r}: argument {j} embedding dim "
                f"{arg.embedding.shape[0]} does not match store dim {dim}"
            )


def write_mentions(events: list[EventMention], path: str | Path) -> None:
    """Write events with inline embeddings, one JSON record per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as out:
        for event in events:
            trig: dict[str, Any] = {
                "start": event.trigger.start,
                "end": event.trigger.end,
                "text": event.trigger.text,
                "embedding": [float(x) for x in event.trigger_embedding],
            }
            if event.gold_type is not None:
                trig["gold_type"] = event.gold_type
            args = []
            for arg in event.arguments:
                rec: dict[str, Any] = {
                    "start": arg.span.start,
                    "end": arg.span.end,
                    "text": arg.span.text,
                    "embedding": [float(x) for x in arg.embedding],
                }
                if arg.entity_type is not None:
                    rec["entity_type"] = arg.entity_type
                if arg.gold_role is not None:
                    rec["gold_role"] = arg.gold_role
                args.append(rec)
            out.write(
                json.dumps(
                    {
                        "event_id": event.event_id,
                        "sentence_id": event.trigger.sentence_id,
                        "trigger": trig,
                        "arguments": args,
                    }
                )
                + "\n"
            )
