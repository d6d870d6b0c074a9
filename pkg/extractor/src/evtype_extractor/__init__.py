"""Embedding extraction toolkit for the evtype typing engine.

This package turns raw text into the engine's on-disk inputs: anchor
embedding dumps (built from a corpus plus anchor word lists) and event
mention files (adapted from SRL and entity detector output).  It never
imports the engine; all interchange happens through the dump and mention
file formats.
"""

from .anchors import (
    AnchorHit,
    AnchorRetrievalError,
    AnchorSpec,
    AnchorSpecError,
    load_anchor_specs,
    load_corpus,
    retrieve_anchor_sentences,
)
from .encoders import Encoder, HashEncoder, make_encoder
from .extraction import AlignmentError, ExtractionRequest, extract_embedding
from .formats import (
    DumpRecord,
    write_dump,
    write_mentions,
)
from .pipeline import build_dump_records
from .srl import SrlFormatError, adapt_srl, load_detections, load_srl

__all__ = [
    "AlignmentError",
    "AnchorHit",
    "AnchorRetrievalError",
    "AnchorSpec",
    "AnchorSpecError",
    "DumpRecord",
    "Encoder",
    "ExtractionRequest",
    "HashEncoder",
    "SrlFormatError",
    "adapt_srl",
    "build_dump_records",
    "extract_embedding",
    "load_anchor_specs",
    "load_corpus",
    "load_detections",
    "load_srl",
    "make_encoder",
    "retrieve_anchor_sentences",
    "write_dump",
    "write_mentions",
]
