"""Aggregated attention scores: subword->word reduction, per-layer max over
heads with argmax head bookkeeping, and layer-pattern profiling.

Layers and heads are 1-based in this module's public surface, matching how
attention heads are usually numbered when discussed ("head 1" .. "head 12").
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attnfile import AttentionTensor, AttnValidationError, TokenizedSample

REDUCTION_MODES = ("max", "mean")


@dataclass(frozen=True)
class AggregatedMatrix:
    """Word-level max-over-heads attention for one layer.

    ``weight[i, j]`` is the maximum over heads of the word-reduced score;
    ``head_id[i, j]`` is the 1-based head attaining it (lowest head on ties).
    """

    layer: int
    n_heads: int
    weight: np.ndarray = field(repr=False)
    head_id: np.ndarray = field(repr=False)

    @property
    def n_words(self) -> int:
        return self.weight.shape[0]


@dataclass(frozen=True)
class LayerProfile:
    """Diagonality summary of one layer's aggregated matrix.

    ``mean_abs_offset`` is the mean over rows of |i - argmax_j weight[i, j]|;
    ``band_mass`` is the fraction of total weight with |i - j| <= 1. Low
    offset / high band mass means a diagonal (word-order) attention pattern,
    the opposite means a heterogeneous one.
    """

    layer: int
    mean_abs_offset: float
    band_mass: float


def _word_blocks(sample: TokenizedSample) -> list[np.ndarray]:
    spans = sample.word_spans()
    for w, span in enumerate(spans):
        if not span:
            raise AttnValidationError(
                f"word {w} ({sample.word_tokens[w]!r}) has no subwords"
            )
    return [np.asarray(span, dtype=np.intp) for span in spans]


def _check_layer_head(tensor: AttentionTensor, layer: int, head: int | None) -> None:
    if not 1 <= layer <= tensor.L:
        raise ValueError(f"layer {layer} out of range [1, {tensor.L}]")
    if head is not None and not 1 <= head <= tensor.H:
        raise ValueError(f"head {head} out of range [1, {tensor.H}]")


def reduce_subwords(
    tensor: AttentionTensor,
    sample: TokenizedSample,
    layer: int,
    head: int,
    mode: str = "max",
) -> np.ndarray:
    """Reduce one head's subword attention matrix to word level.

    Cell (u, v) is the max (or mean) of the scores over all subword pairs
    (i, j) with i owned by word u and j owned by word v. Rows/columns of
    special tokens are dropped entirely.
    """
    _check_layer_head(tensor, layer, head)
    if mode not in REDUCTION_MODES:
        raise ValueError(f"unknown reduction mode {mode!r}")
    if tensor.n != sample.n_subwords:
        raise AttnValidationError("sample not aligned to tensor")
    mat = tensor.scores[layer - 1, head - 1]
    return _reduce_matrix(mat, _word_blocks(sample), mode)


def _reduce_matrix(mat: np.ndarray, blocks: list[np.ndarray], mode: str) -> np.ndarray:
    n_words = len(blocks)
    out = np.empty((n_words, n_words), dtype=np.float32)
    reducer = np.max if mode == "max" else np.mean
    for u, rows in enumerate(blocks):
        sub = mat[rows]
        for v, cols in enumerate(blocks):
            out[u, v] = reducer(sub[:, cols])
    return out


def aggregate_layer(
    tensor: AttentionTensor,
    sample: TokenizedSample,
    layer: int,
    mode: str = "max",
) -> AggregatedMatrix:
    """Max over heads of the word-reduced per-head scores for one layer."""
    _check_layer_head(tensor, layer, None)
    blocks = _word_blocks(sample)
    per_head = np.stack(
        [
            _reduce_matrix(tensor.scores[layer - 1, h], blocks, mode)
            for h in range(tensor.H)
        ]
    )
    weight = per_head.max(axis=0)
    head_id = per_head.argmax(axis=0).astype(np.int32) + 1  # argmax: lowest on ties
    weight.setflags(write=False)
    head_id.setflags(write=False)
    return AggregatedMatrix(layer=layer, n_heads=tensor.H, weight=weight, head_id=head_id)


def profile_layers(
    tensor: AttentionTensor,
    sample: TokenizedSample,
    mode: str = "max",
) -> list[LayerProfile]:
    """Per-layer diagonality profile over the aggregated matrices."""
    profiles = []
    for layer in range(1, tensor.L + 1):
        agg = aggregate_layer(tensor, sample, layer, mode)
        w = agg.weight
        n = agg.n_words
        rows = np.arange(n)
        offset = float(np.mean(np.abs(rows - w.argmax(axis=1))))
        total = float(w.sum())
        if total > 0.0:
            band = np.abs(rows[:, None] - rows[None, :]) <= 1
            band_mass = float(w[band].sum()) / total
        else:
            band_mass = 0.0
        profiles.append(
            LayerProfile(layer=layer, mean_abs_offset=offset, band_mass=band_mass)
        )
    return profiles
