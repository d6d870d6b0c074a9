"""Adapter from SRL and entity detector output to event mention files.

Semantic role labeling gives verbal predicates with ARG0/ARG1 spans; an
entity detector gives typed entity mentions.  The adapter treats each
predicate as a candidate trigger and keeps the entity mentions that
overlap an ARG0 or ARG1 span as its candidate arguments (SRL spans tend
to be long constituents, so the detector's tighter span and entity type
win).  Optionally, occurrences of known nominal trigger words become
additional argument-less candidate events, since verbal SRL misses
noun-headed events.

Input formats, one JSON object per line:

* SRL rows: ``{"sentence_id", "tokens": [...], "frames": [{"predicate":
  [start, end], "arg0": [start, end] | null, "arg1": [start, end] |
  null}]}``
* Detector rows: ``{"sentence_id", "mentions": [{"start", "end",
  "entity_type"}]}``

All spans are word indices with exclusive ends.  Malformed rows raise
:class:`SrlFormatError` naming the offending sentence.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Mapping, Sequence

from .anchors import _normalize
from .encoders import Encoder
from .extraction import ExtractionRequest, extract_embedding
from .formats import ArgumentOut, EventOut

log = logging.getLogger(__name__)


class SrlFormatError(Exception):
    """An SRL or detector row is malformed."""


def _check_span(span: Any, n_tokens: int, what: str, sentence_id: str) -> tuple[int, int]:
    if (
        not isinstance(span, (list, tuple))
        or len(span) != 2
        or not all(isinstance(v, int) for v in span)
    ):
        raise SrlFormatError(f"sentence {sentence_id!r}: {what} span must be [start, end]")
    start, end = span
    if not 0 <= start < end <= n_tokens:
        raise SrlFormatError(
            f"sentence {sentence_id!r}: {what} span [{start}, {end}) out of "
            f"bounds for {n_tokens} tokens"
        )
    return start, end


def load_srl(path: str | Path) -> list[dict[str, Any]]:
    """Read SRL rows, validating tokens, frames, and span bounds."""
    rows: list[dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SrlFormatError(f"{path}: line {lineno}: not valid JSON ({exc})") from exc
            sentence_id = row.get("sentence_id")
            tokens = row.get("tokens")
            frames = row.get("frames")
            if not isinstance(sentence_id, str) or not sentence_id:
                raise SrlFormatError(f"{path}: line {lineno}: missing sentence_id")
            if not isinstance(tokens, list) or not tokens or not all(
                isinstance(t, str) and t for t in tokens
            ):
                raise SrlFormatError(
                    f"sentence {sentence_id!r}: tokens must be a non-empty string list"
                )
            if not isinstance(frames, list):
                raise SrlFormatError(f"sentence {sentence_id!r}: frames must be a list")
            for frame in frames:
                if not isinstance(frame, dict) or "predicate" not in frame:
                    raise SrlFormatError(
                        f"sentence {sentence_id!r}: each frame needs a predicate span"
                    )
                _check_span(frame["predicate"], len(tokens), "predicate", sentence_id)
                for key in ("arg0", "arg1"):
                    if frame.get(key) is not None:
                        _check_span(frame[key], len(tokens), key, sentence_id)
            rows.append(row)
    return rows


def load_detections(path: str | Path) -> dict[str, list[dict[str, Any]]]:
    """Read detector rows into a ``sentence_id -> mentions`` map."""
    detections: dict[str, list[dict[str, Any]]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SrlFormatError(f"{path}: line {lineno}: not valid JSON ({exc})") from exc
            sentence_id = row.get("sentence_id")
            mentions = row.get("mentions")
            if not isinstance(sentence_id, str) or not sentence_id:
                raise SrlFormatError(f"{path}: line {lineno}: missing sentence_id")
            if sentence_id in detections:
                raise SrlFormatError(f"duplicate detector row for sentence {sentence_id!r}")
            if not isinstance(mentions, list):
                raise SrlFormatError(f"sentence {sentence_id!r}: mentions must be a list")
            for mention in mentions:
                if not isinstance(mention, dict):
                    raise SrlFormatError(
                        f"sentence {sentence_id!r}: each mention must be an object"
                    )
                if not isinstance(mention.get("entity_type"), str):
                    raise SrlFormatError(
                        f"sentence {sentence_id!r}: mention missing entity_type"
                    )
                mention["start"], mention["end"] = _check_span(
                    [mention.get("start"), mention.get("end")],
                    10**9,
                    "mention",
                    sentence_id,
                )
            detections[sentence_id] = mentions
    return detections


def _overlaps(a_start: int, a_end: int, b_start: int, b_end: int) -> bool:
    return max(a_start, b_start) < min(a_end, b_end)


def adapt_srl(
    srl_rows: Sequence[Mapping[str, Any]],
    detections: Mapping[str, Sequence[Mapping[str, Any]]],
    encoder: Encoder,
    *,
    nominal_words: Sequence[str] = (),
) -> list[EventOut]:
    """Build candidate event mentions from SRL frames and entity detections.

    Per frame: the predicate becomes the trigger (full-sentence
    extraction); detector mentions overlapping its ARG0 or ARG1 spans
    become arguments (masked extraction), deduplicated by exact span and
    ordered by position.  ARG spans with no overlapping detection are
    dropped with a warning.  Tokens matching ``nominal_words`` (compared
    case-insensitively, ignoring surrounding punctuation) that are not
    already inside a predicate span become additional argument-less
    events.
    """
    nominal = {_normalize(word) for word in nominal_words if _normalize(word)}
    events: list[EventOut] = []
    for row in srl_rows:
        sentence_id = row["sentence_id"]
        tokens = tuple(row["tokens"])
        mentions = detections.get(sentence_id, ())
        predicate_positions: set[int] = set()
        for frame_index, frame in enumerate(row["frames"]):
            pred_start, pred_end = frame["predicate"]
            predicate_positions.update(range(pred_start, pred_end))
            trigger_vec = extract_embedding(
                ExtractionRequest(tokens, pred_start, pred_end, "full"), encoder
            )
            args: list[ArgumentOut] = []
            seen_spans: set[tuple[int, int]] = set()
            for key in ("arg0", "arg1"):
                span = frame.get(key)
                if span is None:
                    continue
                arg_start, arg_end = span
                matched = sorted(
                    (
                        m
                        for m in mentions
                        if _overlaps(m["start"], m["end"], arg_start, arg_end)
                    ),
                    key=lambda m: (m["start"], m["end"]),
                )
                if not matched:
                    log.warning(
                        "sentence %s frame %d: no detected mention overlaps %s "
                        "[%d, %d); dropping it",
                        sentence_id,
                        frame_index,
                        key,
                        arg_start,
                        arg_end,
                    )
                    continue
                for mention in matched:
                    span_key = (mention["start"], mention["end"])
                    if span_key in seen_spans:
                        continue
                    seen_spans.add(span_key)
                    vec = extract_embedding(
                        ExtractionRequest(tokens, mention["start"], mention["end"], "masked"),
                        encoder,
                    )
                    args.append(
                        ArgumentOut(
                            start=mention["start"],
                            end=mention["end"],
                            text=" ".join(tokens[mention["start"] : mention["end"]]),
                            embedding=vec,
                            entity_type=mention["entity_type"],
                        )
                    )
            events.append(
                EventOut(
                    event_id=f"{sentence_id}-t{frame_index}",
                    sentence_id=sentence_id,
                    trigger_start=pred_start,
                    trigger_end=pred_end,
                    trigger_text=" ".join(tokens[pred_start:pred_end]),
                    trigger_embedding=trigger_vec,
                    arguments=tuple(args),
                )
            )
        if not nominal:
            continue
        for position, token in enumerate(tokens):
            if _normalize(token) not in nominal or position in predicate_positions:
                continue
            vec = extract_embedding(
                ExtractionRequest(tokens, position, position + 1, "full"), encoder
            )
            events.append(
                EventOut(
                    event_id=f"{sentence_id}-n{position}",
                    sentence_id=sentence_id,
                    trigger_start=position,
                    trigger_end=position + 1,
                    trigger_text=token,
                    trigger_embedding=vec,
                    arguments=(),
                )
            )
    return events
