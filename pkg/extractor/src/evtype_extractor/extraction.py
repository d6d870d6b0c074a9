"""Span embedding extraction.

Given a tokenized sentence and a target word span, produce one vector by
mean-pooling the encoder's piece vectors over the span.  Two strategies
exist:

* ``full`` - encode the sentence unchanged and pool the target's pieces.
  Used for triggers, whose own lexical identity carries the signal.
* ``masked`` - replace the target words with the encoder's mask token and
  pool the mask position.  Used for arguments, where the surrounding
  context rather than the filler word should drive the representation;
  two sentences differing only in the target word then embed identically.

Sentences longer than the encoder's piece budget are center-cropped: the
window grows greedily from the target one word per side while it fits,
which keeps the target and its nearest context and is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoders import Encoder

STRATEGY_FULL = "full"
STRATEGY_MASKED = "masked"
STRATEGIES = (STRATEGY_FULL, STRATEGY_MASKED)


class AlignmentError(Exception):
    """The target span maps to no encoder pieces."""


@dataclass(frozen=True)
class ExtractionRequest:
    """One span to embed.

    ``target_start``/``target_end`` are word indices into ``tokens`` with
    an exclusive end, so the target is ``tokens[target_start:target_end]``.
    """

    tokens: tuple[str, ...]
    target_start: int
    target_end: int
    strategy: str = STRATEGY_FULL

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("tokens must be non-empty")
        if not 0 <= self.target_start < self.target_end <= len(self.tokens):
            raise ValueError(
                f"target span [{self.target_start}, {self.target_end}) out of "
                f"bounds for {len(self.tokens)} tokens"
            )
        if self.strategy not in STRATEGIES:
            raise ValueError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )


def _center_crop(
    words: list[str], start: int, end: int, encoder: Encoder
) -> tuple[list[str], int, int]:
    """Trim ``words`` to the encoder's piece budget around ``[start, end)``."""
    counts = [encoder.count_pieces(word) for word in words]
    budget = encoder.max_tokens
    if sum(counts) <= budget:
        return words, start, end
    used = sum(counts[start:end])
    if used > budget:
        raise ValueError(
            f"target span alone needs {used} pieces, over the encoder "
            f"budget of {budget}"
        )
    lo, hi = start, end
    while True:
        grew = False
        if lo > 0 and used + counts[lo - 1] <= budget:
            lo -= 1
            used += counts[lo]
            grew = True
        if hi < len(words) and used + counts[hi] <= budget:
            used += counts[hi]
            hi += 1
            grew = True
        if not grew:
            break
    return words[lo:hi], start - lo, end - lo


def extract_embedding(request: ExtractionRequest, encoder: Encoder) -> np.ndarray:
    """Embed one span and return a float32 vector of ``encoder.dim``."""
    words = list(request.tokens)
    start, end = request.target_start, request.target_end
    if request.strategy == STRATEGY_MASKED:
        words = words[:start] + [encoder.mask_token] + words[end:]
        end = start + 1
    words, start, end = _center_crop(words, start, end, encoder)
    vectors, alignment = encoder.encode(words)
    piece_start = alignment[start][0]
    piece_end = alignment[end - 1][1]
    if piece_end <= piece_start:
        target = " ".join(request.tokens[request.target_start : request.target_end])
        raise AlignmentError(f"target {target!r} maps to no encoder pieces")
    pooled = vectors[piece_start:piece_end].astype(np.float64).mean(axis=0)
    return pooled.astype(np.float32)


def pool_pieces(vectors: np.ndarray, piece_start: int, piece_end: int) -> np.ndarray:
    """Mean-pool rows ``[piece_start, piece_end)`` of a piece matrix.

    Exposed so callers can verify the pooling arithmetic against an
    encoder's raw output.
    """
    if not 0 <= piece_start < piece_end <= len(vectors):
        raise ValueError(
            f"piece range [{piece_start}, {piece_end}) out of bounds for "
            f"{len(vectors)} pieces"
        )
    return vectors[piece_start:piece_end].astype(np.float64).mean(axis=0).astype(np.float32)


def extract_many(
    requests: Sequence[ExtractionRequest], encoder: Encoder
) -> list[np.ndarray]:
    """Embed several spans, preserving request order."""
    return [extract_embedding(request, encoder) for request in requests]
