"""Head-specific relation analysis: how selected token-pair edges distribute
across attention heads over a corpus of extracted graphs.

Only forward tree edges are counted; reverse edges duplicate the forward
information and sequence edges carry no head. Token matching is exact and
case-sensitive (code identifiers are case-sensitive).
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass
from typing import Iterable

from .graph_build import ProgramGraph


@dataclass(frozen=True)
class PairQuery:
    """Named token-pair pattern, e.g. def->return or self<->self.

    Patterns are exact strings, optionally with ``*``/``?`` wildcards.
    With ``symmetric`` set, (src, dst) and (dst, src) both match.
    """

    name: str
    src_token: str
    dst_token: str
    symmetric: bool = False

    def __post_init__(self):
        if not self.src_token or not self.dst_token:
            raise ValueError("query patterns must be non-empty")

    def matches(self, src: str, dst: str) -> bool:
        if _match(self.src_token, src) and _match(self.dst_token, dst):
            return True
        if self.symmetric:
            return _match(self.src_token, dst) and _match(self.dst_token, src)
        return False


def _match(pattern: str, token: str) -> bool:
    if any(ch in pattern for ch in "*?["):
        return fnmatch.fnmatchcase(token, pattern)
    return pattern == token


@dataclass(frozen=True)
class HeadDistribution:
    """Edge counts per 1-based head for one query."""

    query_name: str
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)


def count_pair_edges(
    graphs: Iterable[ProgramGraph],
    query: PairQuery,
    n_heads: int | None = None,
) -> HeadDistribution:
    """Count forward tree edges whose endpoint tokens match the query,
    bucketed by the head the edge belongs to."""
    counts: list[int] | None = None if n_heads is None else [0] * n_heads
    for g in graphs:
        if counts is None:
            counts = [0] * g.types.n_heads
        for src, dst, tid in g.tree_edges():
            if query.matches(g.nodes[src], g.nodes[dst]):
                counts[tid] += 1  # tree type id == head index - 1
    return HeadDistribution(query_name=query.name, counts=tuple(counts or ()))


def edge_head_histogram(
    graphs: Iterable[ProgramGraph], n_heads: int | None = None
) -> tuple[int, ...]:
    """All forward tree edges in the corpus bucketed by head (1-based order)."""
    counts: list[int] | None = None if n_heads is None else [0] * n_heads
    for g in graphs:
        if counts is None:
            counts = [0] * g.types.n_heads
        for _src, _dst, tid in g.tree_edges():
            counts[tid] += 1
    return tuple(counts or ())
