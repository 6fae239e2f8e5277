"""attndump: emit ATTN1 attention containers from a checkpoint."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .dump import DumpJob, dump, samples_from_files, samples_from_records


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attndump",
        description="Run a pre-trained code model and dump per-head attention "
        "tensors as ATTN1 files.",
    )
    parser.add_argument(
        "--checkpoint", required=True,
        help="model identifier or local path (any checkpoint with per-head attentions)",
    )
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--max-length", type=int, default=512)
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--sources", nargs="+", help="source files, one sample each")
    src.add_argument("--records", help="JSONL task records with source_tokens")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.sources:
        samples = samples_from_files(args.sources)
    else:
        samples = samples_from_records(args.records)
    if not samples:
        print("error: no input samples", file=sys.stderr)
        return 1
    job = DumpJob(
        checkpoint=args.checkpoint,
        samples=samples,
        out_dir=Path(args.out),
        max_length=args.max_length,
    )
    report = dump(job)
    print(f"written {len(report.written)}, skipped {len(report.skipped)}")
    return 0 if report.written else 1


if __name__ == "__main__":
    sys.exit(main())
