"""Core domain types and bit-exact I/O for the ATTN1 attention container.

An ATTN1 file is the contract between the analysis toolkit and whatever
process dumped the attention tensors:

    magic   b"ATTN1"
    u32 LE  header length in bytes
    bytes   UTF-8 JSON header (sorted keys, compact separators)
    bytes   float32 LE tensor payload, [layer][head][i][j] row-major

The header carries the model identifier, the tensor dimensions, both token
levels (word tokens and subword tokens) and the subword->word alignment.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

MAGIC = b"ATTN1"

#: alignment value for subwords (special tokens) that belong to no word
NO_WORD = -1

#: per-row softmax tolerance; accommodates reduced-precision inference
ROW_SUM_TOL = 1e-3


class AttnFormatError(ValueError):
    """File is not a valid ATTN1 container (bad magic, malformed header)."""


class AttnTruncationError(AttnFormatError):
    """Payload shorter than the header-declared L*H*n*n*4 bytes."""


class AttnValidationError(ValueError):
    """Tensor or sample violates a domain invariant."""


@dataclass(frozen=True)
class TokenizedSample:
    """One source sample at both tokenization levels.

    ``word_tokens`` are the graph's node set (lexer-level tokens);
    ``subword_tokens`` are the model tokenizer's output, special tokens
    included. ``alignment`` maps each subword to its owning word index,
    or ``NO_WORD`` for special tokens.
    """

    sample_id: str
    source_text: str
    word_tokens: tuple[str, ...]
    subword_tokens: tuple[str, ...]
    alignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "word_tokens", tuple(self.word_tokens))
        object.__setattr__(self, "subword_tokens", tuple(self.subword_tokens))
        object.__setattr__(self, "alignment", tuple(self.alignment))
        if len(self.alignment) != len(self.subword_tokens):
            raise AttnValidationError(
                f"alignment length {len(self.alignment)} != "
                f"subword count {len(self.subword_tokens)}"
            )
        n_words = len(self.word_tokens)
        prev = -1
        for pos, a in enumerate(self.alignment):
            if a == NO_WORD:
                continue
            if not 0 <= a < n_words:
                raise AttnValidationError(
                    f"alignment[{pos}] = {a} out of range for {n_words} words"
                )
            if a < prev:
                raise AttnValidationError(
                    f"alignment not non-decreasing at subword {pos}"
                )
            prev = a

    @property
    def n_subwords(self) -> int:
        return len(self.subword_tokens)

    @property
    def n_words(self) -> int:
        return len(self.word_tokens)

    def word_spans(self) -> list[list[int]]:
        """Subword indices owned by each word, in word order."""
        spans: list[list[int]] = [[] for _ in self.word_tokens]
        for pos, a in enumerate(self.alignment):
            if a != NO_WORD:
                spans[a].append(pos)
        return spans


@dataclass(frozen=True)
class AttentionTensor:
    """Dense L x H x n x n row-stochastic attention scores, float32."""

    scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        scores = np.ascontiguousarray(self.scores, dtype=np.float32)
        object.__setattr__(self, "scores", scores)
        scores.setflags(write=False)
        if scores.ndim != 4:
            raise AttnValidationError(f"expected rank-4 scores, got rank {scores.ndim}")
        if min(scores.shape) < 1:
            raise AttnValidationError(f"degenerate tensor shape {scores.shape}")
        validate_row_stochastic(scores)

    @property
    def L(self) -> int:
        return self.scores.shape[0]

    @property
    def H(self) -> int:
        return self.scores.shape[1]

    @property
    def n(self) -> int:
        return self.scores.shape[2]


def validate_row_stochastic(scores: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    """Check every attention row sums to 1 within tol and lies in [0, 1].

    Raises AttnValidationError naming the first offending (layer, head, row).
    """
    if scores.min() < 0.0 or scores.max() > 1.0:
        bad = np.unravel_index(
            int(np.argmax((scores < 0.0) | (scores > 1.0))), scores.shape
        )
        raise AttnValidationError(f"score out of [0,1] at {bad}")
    sums = scores.sum(axis=3, dtype=np.float64)
    off = np.abs(sums - 1.0) > tol
    if off.any():
        layer, head, row = (int(v) for v in np.unravel_index(int(np.argmax(off)), off.shape))
        raise AttnValidationError(
            f"attention row (layer={layer}, head={head}, row={row}) sums to "
            f"{sums[layer, head, row]:.6f}, outside 1 +/- {tol}"
        )


def _check_pair(sample: TokenizedSample, tensor: AttentionTensor) -> None:
    if tensor.n != sample.n_subwords:
        raise AttnValidationError(
            f"tensor n={tensor.n} does not match subword count {sample.n_subwords}"
        )


def write_attn_file(
    sample: TokenizedSample,
    tensor: AttentionTensor,
    path: str | Path,
    model_id: str = "",
) -> None:
    """Write one sample + tensor as an ATTN1 file. Byte-deterministic."""
    _check_pair(sample, tensor)
    header = {
        "model": model_id,
        "sample_id": sample.sample_id,
        "source_text": sample.source_text,
        "word_tokens": list(sample.word_tokens),
        "subword_tokens": list(sample.subword_tokens),
        "alignment": list(sample.alignment),
        "L": tensor.L,
        "H": tensor.H,
        "n": tensor.n,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = tensor.scores.astype("<f4", copy=False).tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)


def read_attn_file(path: str | Path) -> tuple[TokenizedSample, AttentionTensor]:
    """Read and validate an ATTN1 file."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise AttnFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        raw_len = fh.read(4)
        if len(raw_len) < 4:
            raise AttnTruncationError(f"{path}: truncated header length")
        (header_len,) = struct.unpack("<I", raw_len)
        blob = fh.read(header_len)
        if len(blob) < header_len:
            raise AttnTruncationError(f"{path}: truncated header")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise AttnFormatError(f"{path}: malformed header: {exc}") from exc
        try:
            L, H, n = int(header["L"]), int(header["H"]), int(header["n"])
        except KeyError as exc:
            raise AttnFormatError(f"{path}: header missing field {exc}") from exc
        expected = L * H * n * n * 4
        payload = fh.read(expected + 1)
        if len(payload) < expected:
            raise AttnTruncationError(
                f"{path}: payload is {len(payload)} bytes, expected {expected}"
            )
        if len(payload) > expected:
            raise AttnFormatError(f"{path}: trailing bytes after payload")
    scores = np.frombuffer(payload, dtype="<f4").reshape(L, H, n, n)
    sample = TokenizedSample(
        sample_id=header.get("sample_id", ""),
        source_text=header.get("source_text", ""),
        word_tokens=tuple(header.get("word_tokens", ())),
        subword_tokens=tuple(header.get("subword_tokens", ())),
        alignment=tuple(header.get("alignment", ())),
    )
    tensor = AttentionTensor(scores)
    _check_pair(sample, tensor)
    return sample, tensor


def model_id_of(path: str | Path) -> str:
    """Read just the model identifier from an ATTN1 header."""
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise AttnFormatError(f"{path}: bad magic")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(header_len).decode("utf-8"))
    return header.get("model", "")
