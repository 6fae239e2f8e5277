import numpy as np
import pytest

from attngraph import (
    AttentionTensor,
    EdgeTypeTable,
    ExtractionConfig,
    add_sequence_edges,
    aggregate_layer,
    build_graph,
    mask_format_symbols,
)
from attngraph.attnfile import AttnValidationError
from conftest import make_sample, make_tensor


def build_from_tensor(rng, words, H=3, config=ExtractionConfig(), split=None):
    sample = make_sample(words, subword_split=split, special=0)
    tensor = make_tensor(rng, 1, H, sample.n_subwords)
    agg = aggregate_layer(tensor, sample, 1)
    return build_graph(agg, sample, config), sample


class TestEdgeTypeTable:
    def test_layout_for_12_heads(self):
        t = EdgeTypeTable(n_heads=12)
        assert t.n_total == 26
        assert t.name(0) == "head_1"
        assert t.name(11) == "head_12"
        assert t.name(12) == "sequence"
        assert t.name(13) == "head_1_rev"
        assert t.name(25) == "sequence_rev"
        assert t.reverse_of(6) == 19
        assert t.is_reverse(13) and not t.is_reverse(12)

    def test_head_typing_rule(self):
        t = EdgeTypeTable(n_heads=12)
        assert t.name(t.head_type(7)) == "head_7"
        assert t.name(t.reverse_of(t.head_type(7))) == "head_7_rev"

    def test_all_types_enumeration(self):
        t = EdgeTypeTable(n_heads=2)
        names = [e.name for e in t.all_types()]
        assert names == ["head_1", "head_2", "sequence",
                         "head_1_rev", "head_2_rev", "sequence_rev"]


class TestMasking:
    def test_newline_symbol_found(self):
        sample = make_sample(["def", "f", ":", "#NEWLINE#", "return"], special=0)
        assert mask_format_symbols(sample) == {3}

    def test_empty_symbol_list(self):
        sample = make_sample(["#NEWLINE#"], special=0)
        assert mask_format_symbols(sample, frozenset()) == frozenset()

    def test_no_matches(self):
        sample = make_sample(["a", "b"], special=0)
        assert mask_format_symbols(sample) == frozenset()


class TestBuildGraph:
    def test_counts_no_masking(self, rng):
        graph, _ = build_from_tensor(rng, ["a", "b", "c", "d", "e"])
        # 4 tree + 4 sequence + 8 reverse
        assert len(graph.edges) == 16
        assert len(graph.tree_edges()) == 4
        assert len(graph.forward_edges()) == 8

    def test_no_self_loops_and_reverse_pairing(self, rng):
        graph, _ = build_from_tensor(rng, [f"w{i}" for i in range(9)])
        fwd = graph.forward_edges()
        assert all(s != d for s, d, _t in graph.edges)
        for s, d, t in fwd:
            assert (d, s, graph.types.reverse_of(t)) in graph.edges
        assert len(graph.edges) == 2 * len(fwd)

    def test_masked_node_isolated(self, rng):
        graph, sample = build_from_tensor(
            rng, ["def", "f", ":", "#NEWLINE#", "return", "x"]
        )
        assert graph.masked_nodes == {3}
        assert graph.nodes[3] == "<mask>"
        assert all(3 not in (s, d) for s, d, _t in graph.edges)
        # sequence edges skip the masked node entirely (no bridging)
        seq = graph.types.sequence_id
        seq_edges = {(s, d) for s, d, t in graph.edges if t == seq}
        assert seq_edges == {(0, 1), (1, 2), (4, 5)}

    def test_head_typed_edges(self, rng):
        graph, sample = build_from_tensor(rng, ["a", "b", "c", "d"], H=4)
        for s, d, t in graph.tree_edges():
            assert 0 <= t < 4
            assert graph.types.name(t).startswith("head_")

    def test_type_ids_bounded(self, rng):
        graph, _ = build_from_tensor(rng, [f"w{i}" for i in range(12)], H=12)
        ids = {t for _s, _d, t in graph.edges}
        assert ids <= set(range(26))

    def test_deterministic(self, rng):
        sample = make_sample(["a", "b", "c", "d"], special=0)
        tensor = make_tensor(rng, 1, 2, 4)
        agg = aggregate_layer(tensor, sample, 1)
        assert build_graph(agg, sample) == build_graph(agg, sample)

    def test_sequence_edges_off(self, rng):
        config = ExtractionConfig(sequence_edges=False)
        graph, _ = build_from_tensor(rng, ["a", "b", "c"], config=config)
        assert len(graph.edges) == 4  # 2 tree + 2 reverse

    def test_dimension_mismatch(self, rng):
        sample = make_sample(["a", "b", "c"], special=0)
        tensor = make_tensor(rng, 1, 2, 3)
        agg = aggregate_layer(tensor, sample, 1)
        other = make_sample(["a", "b"], special=0)
        with pytest.raises(AttnValidationError):
            build_graph(agg, other)

    def test_symmetric_mst_mode(self, rng):
        config = ExtractionConfig(mode="symmetric-mst")
        graph, _ = build_from_tensor(rng, ["a", "b", "c", "d", "e"], config=config)
        assert len(graph.tree_edges()) == 4
        assert len(graph.edges) == 16

    def test_subword_words(self, rng):
        graph, sample = build_from_tensor(
            rng, ["alpha", "beta", "gamma"], split=[2, 1, 3]
        )
        assert len(graph.nodes) == 3
        assert len(graph.tree_edges()) == 2


class TestAddSequenceEdges:
    def test_three_unmasked_nodes(self, rng):
        config = ExtractionConfig(sequence_edges=False)
        graph, _ = build_from_tensor(rng, ["a", "b", "c"], config=config)
        seq = graph.types.sequence_id
        out = add_sequence_edges(graph)
        seq_edges = [(s, d) for s, d, t in out.edges if t == seq]
        rev_edges = [(s, d) for s, d, t in out.edges if t == graph.types.reverse_of(seq)]
        assert seq_edges == [(0, 1), (1, 2)]
        assert rev_edges == [(1, 0), (2, 1)]

    def test_idempotent(self, rng):
        graph, _ = build_from_tensor(rng, ["a", "b", "c"])
        once = add_sequence_edges(graph)
        assert sorted(once.edges) == sorted(graph.edges)
