import pytest
import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from transformers import PreTrainedTokenizerFast, RobertaConfig, RobertaModel

SOURCES = {
    "add": "def add(a, b):\n    return a + b\n",
    "greet": "def greet(self, name):\n    print(name)\n    return self\n",
}


def build_vocab():
    words = {"<s>", "<pad>", "</s>", "<unk>"}
    for text in SOURCES.values():
        words.update(text.split())
        import re

        words.update(re.findall(r"\w+|[^\w\s]", text))
    ordered = ["<s>", "<pad>", "</s>", "<unk>"] + sorted(
        w for w in words if w not in {"<s>", "<pad>", "</s>", "<unk>"}
    )
    return {w: i for i, w in enumerate(ordered)}


@pytest.fixture(scope="session")
def checkpoint_dir(tmp_path_factory):
    """A locally saved 12-layer / 12-head encoder checkpoint + tokenizer.

    Tiny hidden size keeps inference fast; the layer/head geometry matches
    the reference models.
    """
    path = tmp_path_factory.mktemp("ckpt")
    vocab = build_vocab()
    tok = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    tok.post_processor = processors.TemplateProcessing(
        single="<s> $A </s>",
        special_tokens=[("<s>", vocab["<s>"]), ("</s>", vocab["</s>"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<s>",
        eos_token="</s>",
        unk_token="<unk>",
        pad_token="<pad>",
    )
    fast.save_pretrained(path)

    torch.manual_seed(0)
    config = RobertaConfig(
        vocab_size=len(vocab),
        hidden_size=48,
        num_hidden_layers=12,
        num_attention_heads=12,
        intermediate_size=96,
        max_position_embeddings=600,
        pad_token_id=vocab["<pad>"],
        bos_token_id=vocab["<s>"],
        eos_token_id=vocab["</s>"],
    )
    model = RobertaModel(config)
    model.eval()
    model.save_pretrained(path)
    return str(path)
