"""Run a pre-trained checkpoint over source samples and emit ATTN1 files.

The checkpoint can be any model exposing per-layer, per-head attentions
through the transformers API (CodeBERT-style encoders do). Inference runs
in eval mode on CPU with no gradients, so re-running a job is bit-for-bit
reproducible.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import torch
from transformers import AutoModel, AutoTokenizer

from .container import NO_WORD, write_container

log = logging.getLogger("attndump")

_WORD_RE = re.compile(r"\w+|[^\w\s]")


def lex_words(source_text: str) -> list[str]:
    """Whitespace+punctuation lexer producing the word-level token stream.

    Task records that ship their own source_tokens bypass this entirely.
    """
    return _WORD_RE.findall(source_text)


@dataclass(frozen=True)
class SourceSample:
    sample_id: str
    source_text: str
    word_tokens: tuple[str, ...]


@dataclass
class DumpJob:
    checkpoint: str
    samples: list[SourceSample]
    out_dir: Path
    max_length: int = 512


@dataclass
class DumpReport:
    written: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    def record_skip(self, sample_id: str, reason: str) -> None:
        self.skipped.append(sample_id)
        log.warning("%s skipped: %s", sample_id, reason)


def samples_from_files(paths: list[str | Path]) -> list[SourceSample]:
    out = []
    for p in paths:
        p = Path(p)
        text = p.read_text(encoding="utf-8")
        out.append(
            SourceSample(
                sample_id=p.stem,
                source_text=text,
                word_tokens=tuple(lex_words(text)),
            )
        )
    return out


def samples_from_records(path: str | Path) -> list[SourceSample]:
    """Task records: JSON lines carrying source_tokens (used verbatim)."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            tokens = tuple(str(t) for t in obj["source_tokens"])
            out.append(
                SourceSample(
                    sample_id=str(obj.get("sample_id", f"line-{line_no}")),
                    source_text=str(obj.get("source_text", " ".join(tokens))),
                    word_tokens=tokens,
                )
            )
    return out


def dump(job: DumpJob) -> DumpReport:
    """Emit one ATTN1 file per successfully processed sample."""
    tokenizer = AutoTokenizer.from_pretrained(job.checkpoint)
    model = AutoModel.from_pretrained(job.checkpoint, output_attentions=True)
    model.eval()
    job.out_dir.mkdir(parents=True, exist_ok=True)
    report = DumpReport()
    for sample in job.samples:
        try:
            encoding = tokenizer(
                list(sample.word_tokens),
                is_split_into_words=True,
                return_tensors="pt",
            )
        except Exception as exc:
            report.record_skip(sample.sample_id, f"tokenizer failure: {exc}")
            continue
        n = encoding["input_ids"].shape[1]
        if n > job.max_length:
            # never truncate: windowing would fabricate attention the model
            # never computed between distant tokens
            report.record_skip(
                sample.sample_id, f"{n} subwords exceeds max length {job.max_length}"
            )
            continue
        word_ids = encoding.word_ids(0)
        alignment = [NO_WORD if w is None else int(w) for w in word_ids]
        subwords = tokenizer.convert_ids_to_tokens(encoding["input_ids"][0])
        with torch.no_grad():
            outputs = model(**encoding)
        scores = (
            torch.stack(outputs.attentions, dim=0)[:, 0]  # (L, H, n, n)
            .to(torch.float32)
            .cpu()
            .numpy()
        )
        out_path = job.out_dir / f"{sample.sample_id}.attn"
        write_container(
            out_path,
            model_id=str(job.checkpoint),
            sample_id=sample.sample_id,
            source_text=sample.source_text,
            word_tokens=list(sample.word_tokens),
            subword_tokens=list(subwords),
            alignment=alignment,
            scores=scores,
        )
        report.written.append(str(out_path))
    return report
