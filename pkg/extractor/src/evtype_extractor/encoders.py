"""Contextual token encoders behind one small interface.

An encoder maps a word sequence to one vector per subword piece plus an
alignment telling which piece range each word occupies.  Pooling over
those ranges happens in :mod:`evtype_extractor.extraction`; encoders only
produce the piece-level matrix.

Two implementations ship here:

* :class:`HashEncoder` derives every piece vector from a seeded SHA-256
  hash and mixes in a window of neighbouring pieces, so it is fully
  deterministic, dependency-free, and fast enough for tests and smoke
  runs.  It is the CLI default because it works offline.
* :class:`TransformersEncoder` wraps any Hugging Face masked language
  model (for production-scale runs a large bidirectional model such as
  ``roberta-large`` is the intended choice).  The heavy imports happen
  lazily so the package works without torch installed.
"""

from __future__ import annotations

import hashlib
import logging
from typing import Protocol, Sequence

import numpy as np

log = logging.getLogger(__name__)

Alignment = list[tuple[int, int]]


class Encoder(Protocol):
    """Minimal contract shared by all encoders."""

    mask_token: str
    max_tokens: int
    dim: int

    def count_pieces(self, token: str) -> int:
        """Number of subword pieces ``token`` expands to."""

    def encode(self, tokens: Sequence[str]) -> tuple[np.ndarray, Alignment]:
        """Return ``(vectors, alignment)`` for a word sequence.

        ``vectors`` is a float32 array of shape ``(n_pieces, dim)``.
        ``alignment[i]`` is the half-open piece range ``[start, end)``
        belonging to word ``i``; it may be empty for tokens that produce
        no pieces.
        """


class HashEncoder:
    """Deterministic context-sensitive encoder built from hashed pieces.

    Each word is split into fixed-size character chunks ("pieces").  A
    piece's base vector is drawn from a PRNG seeded with a SHA-256 digest
    of the piece text and the encoder seed, so the same piece always maps
    to the same vector in any process.  Context sensitivity comes from
    adding a scaled mean of the neighbouring pieces' base vectors, which
    makes the same word embed differently in different sentences, the
    property the extraction strategies rely on.
    """

    MASK_TOKEN = "[MASK]"

    def __init__(
        self,
        dim: int = 48,
        *,
        seed: int = 0,
        piece_size: int = 4,
        window: int = 2,
        context_weight: float = 0.3,
        max_tokens: int = 128,
    ) -> None:
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        if piece_size < 1:
            raise ValueError(f"piece_size must be positive, got {piece_size}")
        if window < 0:
            raise ValueError(f"window must be non-negative, got {window}")
        if max_tokens < 1:
            raise ValueError(f"max_tokens must be positive, got {max_tokens}")
        self.dim = dim
        self.seed = seed
        self.piece_size = piece_size
        self.window = window
        self.context_weight = float(context_weight)
        self.max_tokens = max_tokens
        self.mask_token = self.MASK_TOKEN
        self._base_cache: dict[str, np.ndarray] = {}

    def pieces(self, token: str) -> list[str]:
        """Split a word into character chunks; the mask token stays whole."""
        if token == self.mask_token:
            return [token]
        lowered = token.lower()
        size = self.piece_size
        return [lowered[i : i + size] for i in range(0, len(lowered), size)]

    def count_pieces(self, token: str) -> int:
        return len(self.pieces(token))

    def _base(self, piece: str) -> np.ndarray:
        cached = self._base_cache.get(piece)
        if cached is not None:
            return cached
        digest = hashlib.sha256(f"{self.seed}:{piece}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(self.dim)
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec = vec / norm
        self._base_cache[piece] = vec
        return vec

    def encode(self, tokens: Sequence[str]) -> tuple[np.ndarray, Alignment]:
        alignment: Alignment = []
        piece_texts: list[str] = []
        for token in tokens:
            chunks = self.pieces(token)
            alignment.append((len(piece_texts), len(piece_texts) + len(chunks)))
            piece_texts.extend(chunks)
        if len(piece_texts) > self.max_tokens:
            raise ValueError(
                f"sequence has {len(piece_texts)} pieces, over the "
                f"{self.max_tokens} piece limit; crop before encoding"
            )
        bases = np.zeros((len(piece_texts), self.dim), dtype=np.float64)
        for i, piece in enumerate(piece_texts):
            bases[i] = self._base(piece)
        vectors = bases.copy()
        for i in range(len(piece_texts)):
            lo = max(0, i - self.window)
            hi = min(len(piece_texts), i + self.window + 1)
            neighbours = [j for j in range(lo, hi) if j != i]
            if neighbours:
                context = bases[neighbours].mean(axis=0)
                vectors[i] = bases[i] + self.context_weight * context
        return vectors.astype(np.float32), alignment


class TransformersEncoder:
    """Hugging Face masked language model behind the encoder interface.

    Pieces are the model's own subword tokens and vectors come from the
    last hidden layer.  Special tokens ([CLS]/[SEP] and friends) stay in
    the piece matrix but never enter any word's alignment range, so
    pooling skips them naturally.
    """

    def __init__(self, model_name: str, *, device: str = "cpu") -> None:
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise ImportError(
                "transformers and torch are required for TransformersEncoder; "
                "install the 'transformers' extra"
            ) from exc
        self._torch = torch
        self.model_name = model_name
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name)
        self.model.to(device)
        self.model.eval()
        self.device = device
        if self.tokenizer.mask_token is None:
            raise ValueError(f"{model_name} has no mask token")
        self.mask_token = self.tokenizer.mask_token
        self.dim = int(self.model.config.hidden_size)
        limit = int(min(self.tokenizer.model_max_length, 4096))
        # Leave room for the special tokens the tokenizer adds around the
        # sequence.
        self.max_tokens = limit - self.tokenizer.num_special_tokens_to_add()

    def count_pieces(self, token: str) -> int:
        return len(self.tokenizer.tokenize(token))

    def encode(self, tokens: Sequence[str]) -> tuple[np.ndarray, Alignment]:
        encoding = self.tokenizer(
            list(tokens),
            is_split_into_words=True,
            return_tensors="pt",
            truncation=False,
        )
        with self._torch.no_grad():
            output = self.model(**{k: v.to(self.device) for k, v in encoding.items()})
        vectors = output.last_hidden_state[0].cpu().numpy().astype(np.float32)
        word_ids = encoding.word_ids(0)
        spans: dict[int, tuple[int, int]] = {}
        for position, word_id in enumerate(word_ids):
            if word_id is None:
                continue
            start, _ = spans.get(word_id, (position, position))
            spans[word_id] = (start, position + 1)
        alignment: Alignment = []
        cursor = 0
        for i in range(len(tokens)):
            if i in spans:
                alignment.append(spans[i])
                cursor = spans[i][1]
            else:
                alignment.append((cursor, cursor))
        return vectors, alignment


def make_encoder(spec: str) -> Encoder:
    """Build an encoder from a config string.

    Accepted forms:

    * ``hash`` - default deterministic encoder
    * ``hash:<dim>`` - deterministic encoder with a custom dimension
    * ``transformers:<model>`` - any Hugging Face model name
    """
    if spec == "hash":
        return HashEncoder()
    if spec.startswith("hash:"):
        raw = spec.split(":", 1)[1]
        try:
            dim = int(raw)
        except ValueError:
            raise ValueError(f"bad hash encoder dimension {raw!r}") from None
        return HashEncoder(dim)
    if spec.startswith("transformers:"):
        model_name = spec.split(":", 1)[1]
        if not model_name:
            raise ValueError("transformers encoder needs a model name")
        return TransformersEncoder(model_name)
    raise ValueError(
        f"unknown encoder {spec!r}; expected 'hash', 'hash:<dim>', "
        "or 'transformers:<model>'"
    )
