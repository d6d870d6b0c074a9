"""End-to-end dump construction from a corpus and anchor specs."""

from __future__ import annotations

import logging
from typing import Sequence

from .anchors import KIND_TRIGGER, AnchorSpec, retrieve_anchor_sentences
from .encoders import Encoder
from .extraction import ExtractionRequest, extract_embedding
from .formats import STRATEGY_FULL, STRATEGY_MASKED, DumpRecord

log = logging.getLogger(__name__)


def build_dump_records(
    specs: Sequence[AnchorSpec],
    corpus: Sequence[str],
    encoder: Encoder,
    *,
    n_sentences: int = 10,
    seed: int = 0,
    trigger_strategy: str = STRATEGY_FULL,
    argument_strategy: str = STRATEGY_MASKED,
) -> list[DumpRecord]:
    """Retrieve anchor sentences per spec and embed every hit.

    Triggers default to full-sentence extraction and arguments to masked
    extraction; the overrides exist for ablations.  Records preserve spec
    order, then retrieval order within a spec.
    """
    records: list[DumpRecord] = []
    for spec in specs:
        strategy = trigger_strategy if spec.kind == KIND_TRIGGER else argument_strategy
        hits = retrieve_anchor_sentences(corpus, spec, n_sentences, seed)
        log.info("label %s: %d anchor sentences", spec.label_id, len(hits))
        for hit in hits:
            vector = extract_embedding(
                ExtractionRequest(hit.tokens, hit.position, hit.position + 1, strategy),
                encoder,
            )
            records.append(
                DumpRecord(
                    label_id=spec.label_id,
                    anchor_word=hit.anchor_word,
                    sentence_id=hit.sentence_id,
                    strategy=strategy,
                    vector=vector,
                )
            )
    return records
