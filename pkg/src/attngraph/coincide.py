"""Overlap between extracted graphs and rule-based reference graphs:
per-type recovery proportions plus corpus size statistics.

Matching is on unordered node pairs: an extracted edge {u, v} recovers every
reference edge on the same pair, whatever its direction. Reverse edges on
the extracted side are ignored (same pair as their forward twin).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph_build import ProgramGraph


@dataclass(frozen=True)
class ReferenceGraph:
    """Rule-based program graph shipped with a downstream task dataset."""

    sample_id: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, str], ...]  # (src, dst, type_name)

    def __post_init__(self):
        n = len(self.nodes)
        for src, dst, _t in self.edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(
                    f"{self.sample_id}: edge ({src}, {dst}) out of range for {n} nodes"
                )

    def type_names(self) -> set[str]:
        return {t for _s, _d, t in self.edges}


@dataclass(frozen=True)
class TypeCoincidence:
    reference_count: int
    recovered_count: int

    @property
    def proportion(self) -> float:
        return self.recovered_count / self.reference_count if self.reference_count else 0.0


@dataclass(frozen=True)
class CoincidenceReport:
    per_type: dict[str, TypeCoincidence]
    unique_extracted_count: int

    def merge(self, other: "CoincidenceReport") -> "CoincidenceReport":
        types = set(self.per_type) | set(other.per_type)
        merged = {}
        for t in types:
            a = self.per_type.get(t, TypeCoincidence(0, 0))
            b = other.per_type.get(t, TypeCoincidence(0, 0))
            merged[t] = TypeCoincidence(
                a.reference_count + b.reference_count,
                a.recovered_count + b.recovered_count,
            )
        return CoincidenceReport(
            per_type=merged,
            unique_extracted_count=self.unique_extracted_count
            + other.unique_extracted_count,
        )


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


def coincidence(extracted: ProgramGraph, reference: ReferenceGraph) -> CoincidenceReport:
    """Per-reference-type recovery of one sample's extracted graph."""
    if len(extracted.nodes) != len(reference.nodes):
        raise ValueError(
            f"{extracted.sample_id}: node space mismatch "
            f"({len(extracted.nodes)} vs {len(reference.nodes)})"
        )
    extracted_pairs = {_pair(s, d) for s, d, _t in extracted.forward_edges()}
    reference_pairs: set[tuple[int, int]] = set()
    per_type: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for src, dst, type_name in reference.edges:
        pair = _pair(src, dst)
        reference_pairs.add(pair)
        tally = per_type[type_name]
        tally[0] += 1
        if pair in extracted_pairs:
            tally[1] += 1
    unique = sum(1 for pair in extracted_pairs if pair not in reference_pairs)
    return CoincidenceReport(
        per_type={t: TypeCoincidence(ref, rec) for t, (ref, rec) in per_type.items()},
        unique_extracted_count=unique,
    )


def corpus_coincidence(
    pairs: Iterable[tuple[ProgramGraph, ReferenceGraph]]
) -> CoincidenceReport:
    """Pooled per-edge coincidence over a corpus (commutative merge)."""
    report = CoincidenceReport(per_type={}, unique_extracted_count=0)
    for extracted, reference in pairs:
        report = report.merge(coincidence(extracted, reference))
    return report


def graph_size_stats(graphs: Sequence[ProgramGraph]) -> tuple[int, float]:
    """(distinct edge-type ids used anywhere, mean edges per graph).

    Reverse edges are included in both statistics.
    """
    if not graphs:
        raise ValueError("empty corpus")
    type_ids = {tid for g in graphs for _s, _d, tid in g.edges}
    avg = sum(len(g.edges) for g in graphs) / len(graphs)
    return len(type_ids), avg
