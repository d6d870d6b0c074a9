"""Writers for the typing engine's interchange files.

The engine is a separate package; the extractor talks to it exclusively
through two on-disk formats, reproduced here:

* Anchor dump, format version 1.  Binary layout: the magic ``EVDP``, a
  length-prefixed JSON header ``{format_version, dim, count,
  strategy_default}``, then per record a length-prefixed JSON metadata
  block ``{label_id, anchor_word, sentence_id, strategy}`` followed by
  ``dim`` little-endian float32 values.  Length prefixes are 4-byte
  little-endian unsigned ints.  The text variant is one JSON header line
  followed by one JSON record line each, with the vector as a decimal
  array.
* Event mention file: one JSON object per line with ``event_id``,
  ``sentence_id``, a ``trigger`` object (``start``, ``end``, ``text``,
  ``embedding`` and optional ``gold_type``) and an ``arguments`` list
  (``start``, ``end``, ``text``, ``embedding`` and optional
  ``entity_type`` / ``gold_role``).

Vectors are written as float32; spans are word indices with exclusive
ends.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np

DUMP_FORMAT_VERSION = 1
DUMP_MAGIC = b"EVDP"

STRATEGY_FULL = "full"
STRATEGY_MASKED = "masked"
_STRATEGIES = (STRATEGY_FULL, STRATEGY_MASKED)


def _as_float32(vector: Any) -> np.ndarray:
    arr = np.asarray(vector, dtype=np.float32)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"vector must be 1-D and non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite values")
    return arr


@dataclass(frozen=True)
class DumpRecord:
    """One anchor embedding destined for a dump file."""

    label_id: str
    anchor_word: str
    sentence_id: str
    strategy: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        if not self.label_id:
            raise ValueError("label_id must be non-empty")
        if self.strategy not in _STRATEGIES:
            raise ValueError(
                f"strategy must be one of {_STRATEGIES}, got {self.strategy!r}"
            )
        object.__setattr__(self, "vector", _as_float32(self.vector))


def _strategy_default(records: list[DumpRecord]) -> str:
    strategies = {rec.strategy for rec in records}
    if len(strategies) == 1:
        return strategies.pop()
    return "mixed"


def _dump_header(records: list[DumpRecord]) -> dict[str, Any]:
    dim = 0
    if records:
        dim = int(records[0].vector.shape[0])
        for rec in records:
            if int(rec.vector.shape[0]) != dim:
                raise ValueError(
                    f"mixed vector dims in records: {dim} vs {rec.vector.shape[0]}"
                )
    return {
        "format_version": DUMP_FORMAT_VERSION,
        "dim": dim,
        "count": len(records),
        "strategy_default": _strategy_default(records) if records else STRATEGY_FULL,
    }


def _write_block(out: BinaryIO, payload: bytes) -> None:
    out.write(struct.pack("<I", len(payload)))
    out.write(payload)


def write_dump(records: list[DumpRecord], path: str | Path, *, text: bool = False) -> None:
    """Write anchor records; binary by default, line-delimited JSON with ``text``."""
    path = Path(path)
    header = _dump_header(records)
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


@dataclass(frozen=True)
class ArgumentOut:
    """One extracted argument bound for a mention file."""

    start: int
    end: int
    text: str
    embedding: np.ndarray
    entity_type: str | None = None
    gold_role: str | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if not self.text:
            raise ValueError("span text must be non-empty")
        object.__setattr__(self, "embedding", _as_float32(self.embedding))


@dataclass(frozen=True)
class EventOut:
    """One extracted event mention bound for a mention file."""

    event_id: str
    sentence_id: str
    trigger_start: int
    trigger_end: int
    trigger_text: str
    trigger_embedding: np.ndarray
    arguments: tuple[ArgumentOut, ...] = field(default_factory=tuple)
    gold_type: str | None = None

    def __post_init__(self) -> None:
        if not self.event_id:
            raise ValueError("event_id must be non-empty")
        if not 0 <= self.trigger_start < self.trigger_end:
            raise ValueError(f"bad trigger span [{self.trigger_start}, {self.trigger_end})")
        if not self.trigger_text:
            raise ValueError("trigger text must be non-empty")
        object.__setattr__(self, "trigger_embedding", _as_float32(self.trigger_embedding))
        object.__setattr__(self, "arguments", tuple(self.arguments))


def write_mentions(events: list[EventOut], path: str | Path) -> None:
    """Write events with inline embeddings, one JSON record per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as out:
        for event in events:
            trig: dict[str, Any] = {
                "start": event.trigger_start,
                "end": event.trigger_end,
                "text": event.trigger_text,
                "embedding": [float(x) for x in event.trigger_embedding],
            }
            if event.gold_type is not None:
                trig["gold_type"] = event.gold_type
            args = []
            for arg in event.arguments:
                rec: dict[str, Any] = {
                    "start": arg.start,
                    "end": arg.end,
                    "text": arg.text,
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
                        "sentence_id": event.sentence_id,
                        "trigger": trig,
                        "arguments": args,
                    }
                )
                + "\n"
            )
