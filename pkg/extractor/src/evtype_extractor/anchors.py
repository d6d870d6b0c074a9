"""Anchor specifications and corpus retrieval.

An anchor spec names a label (an event type or a role type) together with
the words whose corpus occurrences should represent it.  Trigger labels
may list several near-synonyms; argument labels carry exactly one word,
because the masked extraction strategy keys on a single anchor position.

Retrieval scans a plain-text corpus (one pre-tokenized sentence per line,
whitespace separated) for sentences containing an anchor word, matching
case-insensitively and ignoring leading or trailing punctuation on the
corpus token.  When a word has more matches than requested, a per-label,
per-word seeded sample keeps the choice reproducible and independent of
every other label.
"""

from __future__ import annotations

import json
import logging
import random
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

log = logging.getLogger(__name__)

KIND_TRIGGER = "trigger"
KIND_ARGUMENT = "argument"
KINDS = (KIND_TRIGGER, KIND_ARGUMENT)

_PUNCT = string.punctuation


class AnchorSpecError(Exception):
    """An anchor spec file or entry is malformed."""


class AnchorRetrievalError(Exception):
    """No corpus sentence matches any word of a spec."""


@dataclass(frozen=True)
class AnchorSpec:
    """Words standing in for one ontology label."""

    label_id: str
    anchor_words: tuple[str, ...]
    kind: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "anchor_words", tuple(self.anchor_words))
        if not self.label_id:
            raise AnchorSpecError("label_id must be non-empty")
        if self.kind not in KINDS:
            raise AnchorSpecError(
                f"label {self.label_id!r}: kind must be one of {KINDS}, "
                f"got {self.kind!r}"
            )
        if not self.anchor_words:
            raise AnchorSpecError(f"label {self.label_id!r}: needs at least one anchor word")
        for word in self.anchor_words:
            if not word or word.split() != [word]:
                raise AnchorSpecError(
                    f"label {self.label_id!r}: anchor word {word!r} must be a "
                    "single non-empty token"
                )
        if self.kind == KIND_ARGUMENT and len(self.anchor_words) != 1:
            raise AnchorSpecError(
                f"label {self.label_id!r}: argument labels take exactly one "
                f"anchor word, got {len(self.anchor_words)}"
            )


@dataclass(frozen=True)
class AnchorHit:
    """One corpus sentence selected for an anchor word."""

    anchor_word: str
    sentence_id: str
    tokens: tuple[str, ...]
    position: int


def load_anchor_specs(path: str | Path) -> list[AnchorSpec]:
    """Read a spec file: ``{"specs": [{label_id, kind, anchor_words}, ...]}``."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AnchorSpecError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(document, dict) or not isinstance(document.get("specs"), list):
        raise AnchorSpecError(f"{path}: expected an object with a 'specs' list")
    specs: list[AnchorSpec] = []
    seen: set[str] = set()
    for index, entry in enumerate(document["specs"]):
        if not isinstance(entry, dict):
            raise AnchorSpecError(f"{path}: spec {index} is not an object")
        try:
            spec = AnchorSpec(
                label_id=entry.get("label_id", ""),
                anchor_words=tuple(entry.get("anchor_words", ())),
                kind=entry.get("kind", ""),
            )
        except AnchorSpecError as exc:
            raise AnchorSpecError(f"{path}: spec {index}: {exc}") from None
        if spec.label_id in seen:
            raise AnchorSpecError(f"{path}: duplicate label {spec.label_id!r}")
        seen.add(spec.label_id)
        specs.append(spec)
    return specs


def load_corpus(path: str | Path) -> list[str]:
    """Read a corpus file, one sentence per line; blank lines are skipped."""
    sentences: list[str] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            stripped = line.strip()
            if stripped:
                sentences.append(stripped)
    return sentences


def _normalize(token: str) -> str:
    return token.strip(_PUNCT).lower()


def _word_matches(corpus: Sequence[str], word: str) -> list[tuple[int, int]]:
    """All ``(sentence_index, token_position)`` pairs for a word.

    At most one match per sentence: the first occurrence wins, so a
    sentence never contributes two anchors for the same word.
    """
    needle = word.lower()
    matches: list[tuple[int, int]] = []
    for index, sentence in enumerate(corpus):
        for position, token in enumerate(sentence.split()):
            if _normalize(token) == needle:
                matches.append((index, position))
                break
    return matches


def retrieve_anchor_sentences(
    corpus: Sequence[str],
    spec: AnchorSpec,
    n_sentences: int,
    seed: int = 0,
) -> list[AnchorHit]:
    """Select up to ``n_sentences`` corpus sentences per anchor word.

    Words with fewer matches contribute what they have (with a warning);
    words with none are skipped (with a warning).  Only when every word
    of the spec has zero matches does retrieval fail, because the label
    would otherwise end up with no anchors at all.
    """
    if n_sentences < 1:
        raise ValueError(f"n_sentences must be positive, got {n_sentences}")
    hits: list[AnchorHit] = []
    matched_any = False
    for word in spec.anchor_words:
        matches = _word_matches(corpus, word)
        if not matches:
            log.warning(
                "label %s: anchor word %r matches no corpus sentence", spec.label_id, word
            )
            continue
        matched_any = True
        if len(matches) > n_sentences:
            rng = random.Random(f"{seed}:{spec.label_id}:{word}")
            matches = sorted(rng.sample(matches, n_sentences))
        elif len(matches) < n_sentences:
            log.warning(
                "label %s: anchor word %r has only %d matches, wanted %d",
                spec.label_id,
                word,
                len(matches),
                n_sentences,
            )
        for index, position in matches:
            hits.append(
                AnchorHit(
                    anchor_word=word,
                    sentence_id=f"line-{index + 1}",
                    tokens=tuple(corpus[index].split()),
                    position=position,
                )
            )
    if not matched_any:
        raise AnchorRetrievalError(
            f"label {spec.label_id!r}: no corpus sentence contains any of "
            f"{list(spec.anchor_words)}"
        )
    return hits
