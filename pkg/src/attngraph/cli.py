"""Command-line surface for corpus runs.

Subcommands: extract, profile, eval-cst, head-stats, coincide, export.
Every command is deterministic: identical inputs and flags produce
byte-identical outputs regardless of the worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import os
import sys
from pathlib import Path

from .aggregate import aggregate_layer, profile_layers
from .attnfile import read_attn_file
from .coincide import corpus_coincidence, graph_size_stats
from .cst_metrics import CstParseError, evaluate_graph, merge_evaluations, parse_cst
from .export import (
    Diagnostics,
    TaskLabels,
    export_records,
    ingest_records,
    load_exported_graphs,
)
from .graph_build import DEFAULT_MASK_SYMBOLS, ExtractionConfig, ProgramGraph, build_graph
from .head_stats import PairQuery, count_pair_edges, edge_head_histogram

DEFAULT_QUERIES = (
    PairQuery(name="self-self", src_token="self", dst_token="self", symmetric=True),
    PairQuery(name="def-return", src_token="def", dst_token="return", symmetric=True),
)

WORKERS_ENV = "ATTNGRAPH_WORKERS"


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def load_config_file(path: str | Path) -> dict[str, str]:
    """Plain key=value config; blank lines and '#' comments ignored."""
    out: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _build_extraction_config(args) -> ExtractionConfig:
    values = {
        "layer": "last",
        "reduction": "max",
        "mode": "arborescence",
        "root": "0",
        "sequence_edges": "true",
        "mask_symbols": ",".join(sorted(DEFAULT_MASK_SYMBOLS)),
    }
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in ("layer", "reduction", "mode", "root", "mask_symbols"):
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            values[key] = str(flag)
    if getattr(args, "sequence_edges", None) is not None:
        values["sequence_edges"] = str(args.sequence_edges)
    layer: int | str = values["layer"]
    if layer != "last":
        layer = int(layer)
    symbols = frozenset(s for s in values["mask_symbols"].split(",") if s)
    return ExtractionConfig(
        layer=layer,
        reduction=values["reduction"],
        mode=values["mode"],
        root=int(values["root"]),
        sequence_edges=values["sequence_edges"].lower() in ("1", "true", "yes", "on"),
        mask_symbols=symbols,
    )


def _attn_paths(attn_dir: str | Path) -> list[Path]:
    paths = sorted(p for p in Path(attn_dir).iterdir() if p.is_file())
    return paths


def extract_one(path: Path, config: ExtractionConfig) -> ProgramGraph:
    """Full single-sample pipeline: read, aggregate, build."""
    sample, tensor = read_attn_file(path)
    layer = tensor.L if config.layer == "last" else int(config.layer)
    agg = aggregate_layer(tensor, sample, layer, mode=config.reduction)
    return build_graph(agg, sample, config)


def _extract_star(item: tuple[Path, ExtractionConfig]):
    path, config = item
    try:
        return path, extract_one(path, config), None
    except Exception as exc:  # skip policy: corrupt inputs never abort a run
        return path, None, f"{path.name}: {exc}"


def _run_extract_corpus(
    paths: list[Path], config: ExtractionConfig, workers: int
) -> tuple[list[ProgramGraph], Diagnostics]:
    jobs = [(p, config) for p in paths]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_extract_star, jobs)
    else:
        results = [_extract_star(job) for job in jobs]
    diagnostics = Diagnostics()
    graphs = []
    for _path, graph, error in results:
        if error is not None:
            diagnostics.record(error)
        else:
            graphs.append(graph)
    graphs.sort(key=lambda g: g.sample_id)
    return graphs, diagnostics


def cmd_extract(args) -> int:
    config = _build_extraction_config(args)
    paths = _attn_paths(args.attn_dir)
    if not paths:
        print(f"error: no input files in {args.attn_dir}", file=sys.stderr)
        return 1
    graphs, diagnostics = _run_extract_corpus(paths, config, args.workers)
    if not graphs:
        print("error: no sample could be processed", file=sys.stderr)
        for msg in diagnostics.messages:
            print(f"  {msg}", file=sys.stderr)
        return 1
    export_records(graphs, None, args.out)
    manifest = {
        "config": {
            "layer": config.layer,
            "reduction": config.reduction,
            "mode": config.mode,
            "root": config.root,
            "sequence_edges": config.sequence_edges,
            "mask_symbols": sorted(config.mask_symbols),
        },
        "total": len(paths),
        "processed": len(graphs),
        "skipped": diagnostics.skipped,
        "diagnostics": diagnostics.messages,
    }
    Path(str(args.out) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    for msg in diagnostics.messages:
        print(f"warning: {msg}", file=sys.stderr)
    return 0


def _profile_star(item: tuple[Path, str]):
    path, reduction = item
    try:
        sample, tensor = read_attn_file(path)
        return sample.sample_id, profile_layers(tensor, sample, mode=reduction), None
    except Exception as exc:
        return None, None, f"{path.name}: {exc}"


def cmd_profile(args) -> int:
    paths = _attn_paths(args.attn_dir)
    if not paths:
        print(f"error: no input files in {args.attn_dir}", file=sys.stderr)
        return 1
    jobs = [(p, args.reduction) for p in paths]
    if args.workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(args.workers) as pool:
            results = pool.map(_profile_star, jobs)
    else:
        results = [_profile_star(job) for job in jobs]
    rows = []
    skipped = 0
    for sample_id, profiles, error in results:
        if error is not None:
            print(f"warning: {error}", file=sys.stderr)
            skipped += 1
            continue
        for p in profiles:
            rows.append((sample_id, p.layer, p.mean_abs_offset, p.band_mass))
    if not rows:
        return 1
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "layer", "mean_abs_offset", "band_mass"])
        for sample_id, layer, offset, band in rows:
            writer.writerow([sample_id, layer, f"{offset:.6f}", f"{band:.6f}"])
    return 0


def _load_sources(attn_dir: str | Path) -> dict[str, str]:
    sources = {}
    for path in _attn_paths(attn_dir):
        try:
            sample, _tensor = read_attn_file(path)
        except Exception:
            continue
        sources[sample.sample_id] = sample.source_text
    return sources


def cmd_eval_cst(args) -> int:
    diagnostics = Diagnostics()
    graphs = [g for g, _l in load_exported_graphs(args.graphs, args.heads, diagnostics)]
    sources = _load_sources(args.attn_dir)
    parts = []
    for graph in graphs:
        source = sources.get(graph.sample_id)
        if source is None:
            diagnostics.record(f"{graph.sample_id}: no source text, skipped")
            continue
        try:
            cst = parse_cst(source, word_tokens=graph.nodes)
        except CstParseError as exc:
            diagnostics.record(f"{graph.sample_id}: {exc}")
            continue
        parts.append(evaluate_graph(graph, cst))
    merged = merge_evaluations(parts)
    prefix = str(args.out_prefix)
    with open(prefix + "_tree_distance.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tree_distance", "count"])
        for dist in sorted(merged.tree_distance_hist):
            writer.writerow([dist, merged.tree_distance_hist[dist]])
    with open(prefix + "_tree_seq.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tree_distance", "sequence_distance", "count"])
        for key in sorted(merged.joint_hist):
            writer.writerow([key[0], key[1], merged.joint_hist[key]])
    with open(prefix + "_parent_types.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parent_type", "count"])
        for name, count in merged.top_parent_types(args.top_k):
            writer.writerow([name, count])
    for msg in diagnostics.messages:
        print(f"warning: {msg}", file=sys.stderr)
    return 0 if parts else 1


def _load_queries(path: str | Path | None) -> tuple[PairQuery, ...]:
    if path is None:
        return DEFAULT_QUERIES
    queries = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            name, src, dst = row[0], row[1], row[2]
            symmetric = len(row) > 3 and row[3].strip().lower() in ("1", "true", "yes")
            queries.append(
                PairQuery(name=name, src_token=src, dst_token=dst, symmetric=symmetric)
            )
    return tuple(queries)


def cmd_head_stats(args) -> int:
    diagnostics = Diagnostics()
    graphs = [g for g, _l in load_exported_graphs(args.graphs, args.heads, diagnostics)]
    if not graphs:
        print("error: no graphs loaded", file=sys.stderr)
        return 1
    queries = _load_queries(args.queries)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", "head", "count"])
        for head, count in enumerate(edge_head_histogram(graphs, args.heads), start=1):
            writer.writerow(["__all__", head, count])
        for query in queries:
            dist = count_pair_edges(graphs, query, n_heads=args.heads)
            for head, count in enumerate(dist.counts, start=1):
                writer.writerow([query.name, head, count])
    return 0


def cmd_coincide(args) -> int:
    diagnostics = Diagnostics()
    graphs = {
        g.sample_id: g
        for g, _l in load_exported_graphs(args.graphs, args.heads, diagnostics)
    }
    pairs = []
    for reference, _labels in ingest_records(args.reference, diagnostics):
        graph = graphs.get(reference.sample_id)
        if graph is None:
            diagnostics.record(f"{reference.sample_id}: no extracted graph")
            continue
        pairs.append((graph, reference))
    if not pairs:
        print("error: no overlapping samples", file=sys.stderr)
        return 1
    report = corpus_coincidence(pairs)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["reference_type", "reference_count", "recovered_count", "proportion"]
        )
        for type_name in sorted(report.per_type):
            tc = report.per_type[type_name]
            writer.writerow(
                [type_name, tc.reference_count, tc.recovered_count, f"{tc.proportion:.6f}"]
            )
        writer.writerow(["__unique_extracted__", "", report.unique_extracted_count, ""])
    n_types, avg_edges = graph_size_stats(list(graphs.values()))
    print(f"extracted graphs: {n_types} edge types, {avg_edges:.1f} avg edges")
    for msg in diagnostics.messages:
        print(f"warning: {msg}", file=sys.stderr)
    return 0


def cmd_export(args) -> int:
    diagnostics = Diagnostics()
    graphs = [g for g, _l in load_exported_graphs(args.graphs, args.heads, diagnostics)]
    labels: dict[str, TaskLabels] | None = None
    if args.reference:
        labels = {}
        for reference, ref_labels in ingest_records(args.reference, diagnostics):
            labels[reference.sample_id] = ref_labels
    written = export_records(graphs, labels, args.out, diagnostics)
    for msg in diagnostics.messages:
        print(f"warning: {msg}", file=sys.stderr)
    return 0 if written else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attngraph",
        description="Extract and evaluate typed program graphs from attention tensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_extraction_flags(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--layer", help='1-based layer index or "last"')
        p.add_argument("--reduction", choices=["max", "mean"])
        p.add_argument("--mode", choices=["arborescence", "symmetric-mst"])
        p.add_argument("--root", type=int)
        p.add_argument(
            "--sequence-edges", dest="sequence_edges", choices=["true", "false"]
        )
        p.add_argument("--mask-symbols", dest="mask_symbols", help="comma-separated")

    def add_workers(p):
        p.add_argument("--workers", type=int, default=_default_workers())

    p = sub.add_parser("extract", help="ATTN1 files -> graph records")
    p.add_argument("attn_dir")
    p.add_argument("--out", required=True)
    add_extraction_flags(p)
    add_workers(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("profile", help="per-layer diagonality CSV")
    p.add_argument("attn_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--reduction", choices=["max", "mean"], default="max")
    add_workers(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("eval-cst", help="CST distance/parent statistics")
    p.add_argument("--graphs", required=True, help="records from `extract`")
    p.add_argument("--attn-dir", required=True, help="ATTN1 files (source text)")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--heads", type=int, default=12)
    p.add_argument("--top-k", type=int, default=10)
    p.set_defaults(func=cmd_eval_cst)

    p = sub.add_parser("head-stats", help="edge distribution across heads")
    p.add_argument("--graphs", required=True)
    p.add_argument("--queries", help="CSV: name,src,dst[,symmetric]")
    p.add_argument("--out", required=True)
    p.add_argument("--heads", type=int, default=12)
    p.set_defaults(func=cmd_head_stats)

    p = sub.add_parser("coincide", help="overlap with rule-based reference graphs")
    p.add_argument("--graphs", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--heads", type=int, default=12)
    p.set_defaults(func=cmd_coincide)

    p = sub.add_parser("export", help="merge graphs with task labels into records")
    p.add_argument("--graphs", required=True)
    p.add_argument("--reference", help="task records supplying labels")
    p.add_argument("--out", required=True)
    p.add_argument("--heads", type=int, default=12)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
