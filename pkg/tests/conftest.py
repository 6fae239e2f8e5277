import numpy as np
import pytest

from attngraph import AttentionTensor, TokenizedSample


def random_row_stochastic(rng, L, H, n):
    scores = rng.random((L, H, n, n)).astype(np.float64)
    scores /= scores.sum(axis=-1, keepdims=True)
    return scores.astype(np.float32)


def make_tensor(rng, L=2, H=3, n=6):
    return AttentionTensor(random_row_stochastic(rng, L, H, n))


def make_sample(word_tokens, subword_split=None, special=0, sample_id="s0", source=""):
    """Build a sample; subword_split gives subwords-per-word (default 1 each).

    ``special`` prepends/appends that many sentinel-aligned special tokens.
    """
    if subword_split is None:
        subword_split = [1] * len(word_tokens)
    subwords = []
    alignment = []
    for _ in range(special):
        subwords.append("<s>")
        alignment.append(-1)
    for w, (tok, k) in enumerate(zip(word_tokens, subword_split)):
        for piece in range(k):
            subwords.append(f"{tok}~{piece}" if k > 1 else tok)
            alignment.append(w)
    for _ in range(special):
        subwords.append("</s>")
        alignment.append(-1)
    return TokenizedSample(
        sample_id=sample_id,
        source_text=source,
        word_tokens=tuple(word_tokens),
        subword_tokens=tuple(subwords),
        alignment=tuple(alignment),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
