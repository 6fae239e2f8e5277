"""Writer for the ATTN1 container format.

This mirrors the format consumed by the analysis toolkit and is the sole
contract between the two packages:

    magic   b"ATTN1"
    u32 LE  header length
    bytes   UTF-8 JSON header (sorted keys, compact separators)
    bytes   float32 LE payload, [layer][head][i][j] row-major
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ATTN1"
NO_WORD = -1


def write_container(
    path: str | Path,
    *,
    model_id: str,
    sample_id: str,
    source_text: str,
    word_tokens: list[str],
    subword_tokens: list[str],
    alignment: list[int],
    scores: np.ndarray,
) -> None:
    if scores.ndim != 4:
        raise ValueError(f"scores must be rank 4, got {scores.shape}")
    L, H, n, n2 = scores.shape
    if n != n2 or n != len(subword_tokens) or n != len(alignment):
        raise ValueError(
            f"dimension mismatch: scores {scores.shape}, "
            f"{len(subword_tokens)} subwords, {len(alignment)} alignment entries"
        )
    header = {
        "model": model_id,
        "sample_id": sample_id,
        "source_text": source_text,
        "word_tokens": list(word_tokens),
        "subword_tokens": list(subword_tokens),
        "alignment": list(alignment),
        "L": L,
        "H": H,
        "n": n,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = np.ascontiguousarray(scores, dtype="<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)
