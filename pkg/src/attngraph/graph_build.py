"""Builds the final typed program graph from an aggregated attention matrix:
spanning-structure extraction, format-symbol masking, head-typed edges,
sequence edges and reverse edges.

Edge-type id layout for H heads (26 types for H = 12):

    0 .. H-1    "head_1" .. "head_H"   (tree edges, typed by argmax head)
    H           "sequence"
    id + H + 1  reverse of forward type ``id``, name suffixed "_rev"
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .aggregate import AggregatedMatrix
from .arborescence import ExtractedTree, TreeEdge, WeightedDigraph, max_arborescence
from .attnfile import AttnValidationError, TokenizedSample

DEFAULT_MASK_SYMBOLS = frozenset({"#NEWLINE#", "#INDENT#", "#DEDENT#"})
MASK_TOKEN = "<mask>"

EXTRACTION_MODES = ("arborescence", "symmetric-mst")


@dataclass(frozen=True)
class EdgeType:
    id: int
    name: str
    is_reverse: bool


@dataclass(frozen=True)
class EdgeTypeTable:
    """Type-id <-> name mapping for a given head count."""

    n_heads: int

    @property
    def sequence_id(self) -> int:
        return self.n_heads

    @property
    def n_forward(self) -> int:
        return self.n_heads + 1

    @property
    def n_total(self) -> int:
        return 2 * self.n_forward

    def head_type(self, head_id: int) -> int:
        """Forward type id for a 1-based head index."""
        if not 1 <= head_id <= self.n_heads:
            raise ValueError(f"head id {head_id} out of range [1, {self.n_heads}]")
        return head_id - 1

    def reverse_of(self, type_id: int) -> int:
        if not 0 <= type_id < self.n_forward:
            raise ValueError(f"{type_id} is not a forward type id")
        return type_id + self.n_forward

    def is_reverse(self, type_id: int) -> bool:
        return type_id >= self.n_forward

    def is_tree_type(self, type_id: int) -> bool:
        return 0 <= type_id < self.n_heads

    def name(self, type_id: int) -> str:
        if not 0 <= type_id < self.n_total:
            raise ValueError(f"type id {type_id} out of range")
        if self.is_reverse(type_id):
            return self.name(type_id - self.n_forward) + "_rev"
        if type_id == self.sequence_id:
            return "sequence"
        return f"head_{type_id + 1}"

    def all_types(self) -> list[EdgeType]:
        return [
            EdgeType(id=i, name=self.name(i), is_reverse=self.is_reverse(i))
            for i in range(self.n_total)
        ]


@dataclass(frozen=True)
class ExtractionConfig:
    layer: int | str = "last"  # 1-based index or "last"
    reduction: str = "max"
    mode: str = "arborescence"
    root: int = 0
    sequence_edges: bool = True
    mask_symbols: frozenset[str] = DEFAULT_MASK_SYMBOLS

    def __post_init__(self):
        if self.mode not in EXTRACTION_MODES:
            raise ValueError(f"unknown extraction mode {self.mode!r}")
        object.__setattr__(self, "mask_symbols", frozenset(self.mask_symbols))


@dataclass(frozen=True)
class ProgramGraph:
    """Final typed multigraph over word tokens, ready for export.

    ``nodes`` holds the word token strings with masked entries replaced by
    the mask symbol; ``edges`` are (src, dst, edge_type_id) triples with one
    reverse edge per forward edge.
    """

    sample_id: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, int], ...]
    masked_nodes: frozenset[int]
    types: EdgeTypeTable

    def forward_edges(self) -> list[tuple[int, int, int]]:
        return [e for e in self.edges if not self.types.is_reverse(e[2])]

    def tree_edges(self) -> list[tuple[int, int, int]]:
        return [e for e in self.edges if self.types.is_tree_type(e[2])]


def mask_format_symbols(
    sample: TokenizedSample, symbol_list: frozenset[str] = DEFAULT_MASK_SYMBOLS
) -> frozenset[int]:
    """Indices of word tokens that exactly match a configured format symbol."""
    return frozenset(
        i for i, tok in enumerate(sample.word_tokens) if tok in symbol_list
    )


def _extract_tree(agg: AggregatedMatrix, config: ExtractionConfig) -> ExtractedTree:
    g = WeightedDigraph(agg.weight)
    if config.mode == "arborescence":
        tree = max_arborescence(g, root=config.root)
    else:
        tree = _symmetric_mst(agg, root=config.root)
    edges = tuple(
        replace(e, head_id=_edge_head(agg, e)) for e in tree.edges
    )
    return ExtractedTree(root=tree.root, n=tree.n, edges=edges)


def _edge_head(agg: AggregatedMatrix, e: TreeEdge) -> int:
    return int(agg.head_id[e.src, e.dst])


def _symmetric_mst(agg: AggregatedMatrix, root: int) -> ExtractedTree:
    """Alternative extraction: undirected maximum spanning tree over the
    symmetrized weights, oriented away from the root."""
    w = agg.weight
    n = agg.n_words
    sym = (w + w.T) / 2.0
    # Prim with deterministic ties (smaller node index wins)
    in_tree = [root]
    chosen: list[tuple[int, int]] = []
    remaining = set(range(n)) - {root}
    while remaining:
        best = (float("-inf"), -1, -1)
        for u in in_tree:
            for v in sorted(remaining):
                if sym[u, v] > best[0]:
                    best = (float(sym[u, v]), u, v)
        _, u, v = best
        chosen.append((u, v))
        in_tree.append(v)
        remaining.remove(v)
    edges = tuple(
        TreeEdge(src=u, dst=v, weight=float(sym[u, v])) for u, v in chosen
    )
    return ExtractedTree(root=root, n=n, edges=edges)


def build_graph(
    agg: AggregatedMatrix,
    sample: TokenizedSample,
    config: ExtractionConfig = ExtractionConfig(),
) -> ProgramGraph:
    """Spanning-structure edges typed by head, minus reflexive edges, minus
    edges on masked format symbols, plus sequence edges, plus reverses."""
    if agg.n_words != sample.n_words:
        raise AttnValidationError(
            f"aggregated matrix is {agg.n_words} words, sample has {sample.n_words}"
        )
    types = EdgeTypeTable(n_heads=agg.n_heads)
    masked = mask_format_symbols(sample, config.mask_symbols)
    tree = _extract_tree(agg, config)

    forward: list[tuple[int, int, int]] = []
    for e in tree.edges:
        if e.src == e.dst:  # cannot arise from the extractor; filtered anyway
            continue
        if e.src in masked or e.dst in masked:
            continue
        forward.append((e.src, e.dst, types.head_type(e.head_id)))
    if config.sequence_edges:
        for i in range(sample.n_words - 1):
            if i in masked or i + 1 in masked:
                continue
            forward.append((i, i + 1, types.sequence_id))

    forward.sort(key=lambda e: (e[0], e[1], e[2]))
    edges = []
    for src, dst, tid in forward:
        edges.append((src, dst, tid))
        edges.append((dst, src, types.reverse_of(tid)))

    nodes = tuple(
        MASK_TOKEN if i in masked else tok
        for i, tok in enumerate(sample.word_tokens)
    )
    return ProgramGraph(
        sample_id=sample.sample_id,
        nodes=nodes,
        edges=tuple(edges),
        masked_nodes=masked,
        types=types,
    )


def add_sequence_edges(graph: ProgramGraph) -> ProgramGraph:
    """Add (i, i+1) sequence edges and their reverses for every adjacent
    unmasked pair, skipping pairs already present."""
    existing = set(graph.edges)
    seq = graph.types.sequence_id
    rev = graph.types.reverse_of(seq)
    new_edges = list(graph.edges)
    for i in range(len(graph.nodes) - 1):
        if i in graph.masked_nodes or i + 1 in graph.masked_nodes:
            continue
        if (i, i + 1, seq) not in existing:
            new_edges.append((i, i + 1, seq))
            new_edges.append((i + 1, i, rev))
    return replace(graph, edges=tuple(new_edges))
