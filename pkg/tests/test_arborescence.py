import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attngraph import (
    WeightedDigraph,
    brute_force_arborescence,
    max_arborescence,
)


def graph_from(rows):
    return WeightedDigraph(np.array(rows, dtype=np.float64))


class TestBasics:
    def test_single_node(self):
        g = graph_from([[0.0]])
        tree = max_arborescence(g, 0)
        assert tree.edges == ()
        assert brute_force_arborescence(g, 0).edges == ()

    def test_two_nodes(self):
        g = graph_from([[0, 0.9], [0.1, 0]])
        tree = max_arborescence(g, 0)
        assert tree.parent_of() == {1: 0}
        assert tree.total_weight == 0.9

    def test_simple_chain(self):
        # best tree is 0->1->2 with total 9
        g = graph_from([[0, 5, 1], [0, 0, 4], [0, 2, 0]])
        tree = max_arborescence(g, 0)
        oracle = brute_force_arborescence(g, 0)
        assert tree.parent_of() == {1: 0, 2: 1}
        assert tree.total_weight == 9
        assert oracle.total_weight == 9

    def test_cycle_contraction_required(self):
        # greedy in-edges form the cycle 1<->2; optimum total is 11
        g = graph_from([[0, 1, 1], [0, 0, 10], [0, 10, 0]])
        tree = max_arborescence(g, 0)
        oracle = brute_force_arborescence(g, 0)
        tree.validate()
        assert tree.total_weight == 11
        assert oracle.total_weight == 11

    def test_bad_root(self):
        g = graph_from([[0.0]])
        with pytest.raises(ValueError):
            max_arborescence(g, 3)

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            WeightedDigraph(np.zeros((0, 0)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            graph_from([[0, np.inf], [0, 0]])

    def test_brute_force_refuses_large(self):
        g = WeightedDigraph(np.zeros((9, 9)))
        with pytest.raises(ValueError):
            brute_force_arborescence(g, 0)

    def test_equal_weights_total_forced(self):
        g = WeightedDigraph(np.full((4, 4), 0.5))
        for tree in (max_arborescence(g, 0), brute_force_arborescence(g, 0)):
            tree.validate()
            assert tree.total_weight == 1.5

    def test_deterministic_tie_rule_prefers_smaller_source(self):
        # 1 and 2 both offer weight-1 edges into 3; node 1 must win
        g = graph_from(
            [[0, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 0]]
        )
        tree = max_arborescence(g, 0)
        assert tree.parent_of()[3] == 1


def adversarial_weights(rng, n):
    """Weight patterns that force greedy in-edge cycles and nested contractions."""
    w = rng.random((n, n))
    # plant a strong cycle over a random subset
    k = rng.integers(2, n + 1)
    nodes = rng.permutation(n)[:k]
    for a, b in zip(nodes, np.roll(nodes, -1)):
        w[a, b] = 10.0 + rng.random()
    return w


class TestOracleEquivalence:
    def test_random_uniform(self):
        rng = np.random.default_rng(7)
        for trial in range(200):
            n = int(rng.integers(2, 7))
            g = WeightedDigraph(rng.random((n, n)))
            fast = max_arborescence(g, 0)
            slow = brute_force_arborescence(g, 0)
            assert fast.total_weight == slow.total_weight, f"trial {trial}"

    def test_adversarial_cycles(self):
        rng = np.random.default_rng(13)
        for trial in range(100):
            n = int(rng.integers(3, 7))
            g = WeightedDigraph(adversarial_weights(rng, n))
            fast = max_arborescence(g, 0)
            slow = brute_force_arborescence(g, 0)
            assert fast.total_weight == slow.total_weight, f"trial {trial}"

    def test_nonzero_roots(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            root = int(rng.integers(0, n))
            g = WeightedDigraph(rng.random((n, n)))
            fast = max_arborescence(g, root)
            slow = brute_force_arborescence(g, root)
            assert fast.total_weight == slow.total_weight


class TestInvariants:
    def test_structure_on_random_graphs(self):
        rng = np.random.default_rng(99)
        for trial in range(300):
            n = int(rng.integers(1, 30))
            w = adversarial_weights(rng, n) if n >= 2 and trial % 2 else rng.random((n, n))
            tree = max_arborescence(WeightedDigraph(w), 0)
            tree.validate()  # in-degree, connectivity, n-1 edges, no self-loops
            assert len(tree.edges) == n - 1

    def test_constant_shift(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(2, 7))
            w = rng.random((n, n))
            c = 2.5
            base = max_arborescence(WeightedDigraph(w), 0)
            shifted = max_arborescence(WeightedDigraph(w + c), 0)
            assert {(e.src, e.dst) for e in base.edges} == {
                (e.src, e.dst) for e in shifted.edges
            }
            assert shifted.total_weight == pytest.approx(
                base.total_weight + (n - 1) * c
            )


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(2, 6),
    seed=st.integers(0, 2**31),
    root=st.integers(0, 5),
)
def test_oracle_property(n, seed, root):
    root = root % n
    rng = np.random.default_rng(seed)
    g = WeightedDigraph(rng.random((n, n)))
    fast = max_arborescence(g, root)
    slow = brute_force_arborescence(g, root)
    fast.validate()
    assert fast.total_weight == slow.total_weight
