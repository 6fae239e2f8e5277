"""Typed program-graph extraction from the self-attention of code models."""

from .aggregate import AggregatedMatrix, LayerProfile, aggregate_layer, profile_layers, reduce_subwords
from .arborescence import (
    ExtractedTree,
    WeightedDigraph,
    brute_force_arborescence,
    max_arborescence,
)
from .attnfile import (
    AttentionTensor,
    AttnFormatError,
    AttnTruncationError,
    AttnValidationError,
    TokenizedSample,
    read_attn_file,
    write_attn_file,
)
from .coincide import CoincidenceReport, ReferenceGraph, coincidence, graph_size_stats
from .cst_metrics import (
    CstIndex,
    evaluate_graph,
    last_common_parent,
    parse_cst,
    tree_distance,
)
from .export import TaskLabels, export_records, ingest_records, load_exported_graphs
from .graph_build import (
    EdgeTypeTable,
    ExtractionConfig,
    ProgramGraph,
    add_sequence_edges,
    build_graph,
    mask_format_symbols,
)
from .head_stats import HeadDistribution, PairQuery, count_pair_edges, edge_head_histogram

__version__ = "0.1.0"
