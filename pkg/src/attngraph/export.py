"""Line-delimited JSON records compatible with the downstream
localization-and-repair pipeline: export of extracted graphs with task-label
passthrough, and ingest of reference graphs from the same layout.

Record layout (one JSON object per line):

    source_tokens      list of token strings
    edges              list of [src, dst, type_id, type_name]
    has_bug            bool
    error_location     int
    repair_targets     list of int
    repair_candidates  list of int
    sample_id          string (optional on ingest; synthesized when absent)

Edges carry both their numeric id and their name, so consumers need no
out-of-band type table. Exports are byte-deterministic: samples sorted by
id, edges by (src, dst, type_id).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Iterable, Iterator

from .coincide import ReferenceGraph
from .graph_build import EdgeTypeTable, ProgramGraph


@dataclass(frozen=True)
class TaskLabels:
    has_bug: bool = False
    error_location: int = 0
    repair_targets: tuple[int, ...] = ()
    repair_candidates: tuple[int, ...] = ()


@dataclass
class Diagnostics:
    """Per-run tally of skipped inputs, with one message per skip."""

    skipped: int = 0
    messages: list[str] = dataclass_field(default_factory=list)

    def record(self, message: str) -> None:
        self.skipped += 1
        self.messages.append(message)


class RecordFormatError(ValueError):
    """Line does not match the expected record layout."""


def _graph_record(graph: ProgramGraph, labels: TaskLabels) -> dict:
    edges = sorted((s, d, t) for s, d, t in graph.edges)
    return {
        "sample_id": graph.sample_id,
        "source_tokens": list(graph.nodes),
        "edges": [[s, d, t, graph.types.name(t)] for s, d, t in edges],
        "has_bug": labels.has_bug,
        "error_location": labels.error_location,
        "repair_targets": list(labels.repair_targets),
        "repair_candidates": list(labels.repair_candidates),
    }


def export_records(
    graphs: Iterable[ProgramGraph],
    labels: dict[str, TaskLabels] | None,
    path: str | Path,
    diagnostics: Diagnostics | None = None,
) -> int:
    """Write one record per graph, labels passed through by sample id.

    Graphs without a matching label record get default (bug-free) labels
    when ``labels`` is None, and are skipped with a diagnostic when a label
    table was supplied but has no entry. Returns the number written.
    """
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    written = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for graph in sorted(graphs, key=lambda g: g.sample_id):
            if labels is None:
                sample_labels = TaskLabels()
            elif graph.sample_id in labels:
                sample_labels = labels[graph.sample_id]
            else:
                diagnostics.record(f"{graph.sample_id}: no task record, skipped")
                continue
            record = _graph_record(graph, sample_labels)
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
            written += 1
    return written


def _parse_record(line: str, line_no: int) -> tuple[ReferenceGraph, TaskLabels]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordFormatError(f"line {line_no}: not JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise RecordFormatError(f"line {line_no}: record is not an object")
    try:
        tokens = tuple(str(t) for t in obj["source_tokens"])
        raw_edges = obj["edges"]
    except KeyError as exc:
        raise RecordFormatError(f"line {line_no}: missing field {exc}") from exc
    edges = []
    for e in raw_edges:
        if not isinstance(e, (list, tuple)) or len(e) < 3:
            raise RecordFormatError(f"line {line_no}: malformed edge {e!r}")
        src, dst = int(e[0]), int(e[1])
        type_name = str(e[3]) if len(e) > 3 else str(e[2])
        edges.append((src, dst, type_name))
    sample_id = str(obj.get("sample_id", f"line-{line_no}"))
    try:
        graph = ReferenceGraph(sample_id=sample_id, nodes=tokens, edges=tuple(edges))
    except ValueError as exc:
        raise RecordFormatError(f"line {line_no}: {exc}") from exc
    labels = TaskLabels(
        has_bug=bool(obj.get("has_bug", False)),
        error_location=int(obj.get("error_location", 0)),
        repair_targets=tuple(int(i) for i in obj.get("repair_targets", ())),
        repair_candidates=tuple(int(i) for i in obj.get("repair_candidates", ())),
    )
    return graph, labels


def ingest_records(
    path: str | Path, diagnostics: Diagnostics | None = None
) -> Iterator[tuple[ReferenceGraph, TaskLabels]]:
    """Read reference graphs + labels; malformed lines are skipped with a
    diagnostic, never fatal."""
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield _parse_record(line, line_no)
            except RecordFormatError as exc:
                diagnostics.record(str(exc))


def load_exported_graphs(
    path: str | Path,
    n_heads: int,
    diagnostics: Diagnostics | None = None,
) -> Iterator[tuple[ProgramGraph, TaskLabels]]:
    """Re-ingest records exported by this toolkit as ProgramGraphs.

    The numeric type ids in the file must fit the given head count.
    """
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    types = EdgeTypeTable(n_heads=n_heads)
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                nodes = tuple(str(t) for t in obj["source_tokens"])
                edges = []
                for e in obj["edges"]:
                    src, dst, tid = int(e[0]), int(e[1]), int(e[2])
                    if not (0 <= src < len(nodes) and 0 <= dst < len(nodes)):
                        raise RecordFormatError(
                            f"line {line_no}: edge ({src}, {dst}) out of range"
                        )
                    if not 0 <= tid < types.n_total:
                        raise RecordFormatError(
                            f"line {line_no}: type id {tid} out of range"
                        )
                    edges.append((src, dst, tid))
                graph = ProgramGraph(
                    sample_id=str(obj.get("sample_id", f"line-{line_no}")),
                    nodes=nodes,
                    edges=tuple(edges),
                    masked_nodes=frozenset(
                        i for i, t in enumerate(nodes) if t == "<mask>"
                    ),
                    types=types,
                )
                labels = TaskLabels(
                    has_bug=bool(obj.get("has_bug", False)),
                    error_location=int(obj.get("error_location", 0)),
                    repair_targets=tuple(int(i) for i in obj.get("repair_targets", ())),
                    repair_candidates=tuple(
                        int(i) for i in obj.get("repair_candidates", ())
                    ),
                )
                yield graph, labels
            except (RecordFormatError, ValueError, KeyError, TypeError) as exc:
                diagnostics.record(f"line {line_no}: {exc}")
