"""Maximum spanning arborescence over a dense weighted digraph.

``max_arborescence`` implements the Chu-Liu/Edmonds algorithm with recursive
cycle contraction; ``brute_force_arborescence`` exhaustively enumerates
parent assignments and serves as the test oracle for small graphs.

Tie rule everywhere: among equal-weight candidate in-edges, the smaller
source index wins, making both routines deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")


@dataclass(frozen=True)
class WeightedDigraph:
    """Dense directed graph; weights[u, v] is the weight of edge u -> v.

    Diagonal cells are ignored. All weights must be finite.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if w.shape[0] < 1:
            raise ValueError("graph needs at least one node")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class TreeEdge:
    src: int
    dst: int
    weight: float
    head_id: int = 0


@dataclass(frozen=True)
class ExtractedTree:
    """A spanning arborescence: every non-root node has exactly one parent."""

    root: int
    n: int
    edges: tuple[TreeEdge, ...]

    @property
    def total_weight(self) -> float:
        # fixed summation order (by destination) so equal edge sets give
        # bit-equal totals regardless of how the tree was found
        return sum(e.weight for e in sorted(self.edges, key=lambda e: e.dst))

    def parent_of(self) -> dict[int, int]:
        return {e.dst: e.src for e in self.edges}

    def validate(self) -> None:
        parents = {}
        for e in self.edges:
            if e.src == e.dst:
                raise ValueError(f"self-loop at node {e.src}")
            if e.dst in parents:
                raise ValueError(f"node {e.dst} has two parents")
            parents[e.dst] = e.src
        if self.root in parents:
            raise ValueError("root has an incoming edge")
        if len(parents) != self.n - 1:
            raise ValueError(f"expected {self.n - 1} edges, got {len(parents)}")
        for v in parents:
            seen = set()
            node = v
            while node != self.root:
                if node in seen:
                    raise ValueError(f"cycle through node {node}")
                seen.add(node)
                node = parents[node]


def _parents_to_tree(
    g: WeightedDigraph, root: int, parent: dict[int, int]
) -> ExtractedTree:
    edges = tuple(
        TreeEdge(src=p, dst=v, weight=float(g.weights[p, v]))
        for v, p in sorted(parent.items())
    )
    return ExtractedTree(root=root, n=g.n, edges=edges)


def max_arborescence(g: WeightedDigraph, root: int = 0) -> ExtractedTree:
    """Maximum-weight spanning arborescence rooted at ``root`` (Chu-Liu/Edmonds)."""
    if not 0 <= root < g.n:
        raise ValueError(f"root {root} out of range for {g.n} nodes")
    parent = _cle_parents(g.weights, root)
    tree = _parents_to_tree(g, root, parent)
    tree.validate()
    return tree


def _greedy_parents(w: np.ndarray, root: int) -> list[int]:
    m = w.shape[0]
    parent = [-1] * m
    for v in range(m):
        if v == root:
            continue
        col = w[:, v].copy()
        col[v] = NEG_INF
        parent[v] = int(np.argmax(col))  # first max: smallest source index
    return parent


def _find_cycle(parent: list[int], root: int) -> list[int] | None:
    m = len(parent)
    color = [0] * m  # 0 unvisited, 1 on path, 2 done
    for start in range(m):
        if color[start] or start == root:
            continue
        path = []
        v = start
        while v != root and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = parent[v]
        if v != root and color[v] == 1:
            return path[path.index(v):]
        for u in path:
            color[u] = 2
    return None


def _cle_parents(w: np.ndarray, root: int) -> dict[int, int]:
    m = w.shape[0]
    if m == 1:
        return {}
    parent = _greedy_parents(w, root)
    cycle = _find_cycle(parent, root)
    if cycle is None:
        return {v: parent[v] for v in range(m) if v != root}

    in_cycle = set(cycle)
    keep = [u for u in range(m) if u not in in_cycle]
    new_index = {old: i for i, old in enumerate(keep)}
    c = len(keep)  # contracted supernode goes last
    w2 = np.full((c + 1, c + 1), NEG_INF)
    cycle_score = {v: w[parent[v], v] for v in in_cycle}
    enter_from: dict[int, int] = {}  # new dst -> cycle node sourcing c -> dst
    entry_node: dict[int, int] = {}  # old src -> cycle node receiving src -> c

    for old_u in keep:
        iu = new_index[old_u]
        for old_v in keep:
            if old_u != old_v:
                w2[iu, new_index[old_v]] = w[old_u, old_v]
        best, best_v = NEG_INF, -1
        for v in sorted(in_cycle):
            score = w[old_u, v] - cycle_score[v]
            if score > best:
                best, best_v = score, v
        w2[iu, c] = best
        entry_node[old_u] = best_v
        best, best_src = NEG_INF, -1
        for u in sorted(in_cycle):
            if w[u, old_u] > best:
                best, best_src = w[u, old_u], u
        w2[c, iu] = best
        enter_from[iu] = best_src

    root2 = new_index[root]  # root never has a parent pointer, so never in a cycle
    inner = _cle_parents(w2, root2)

    result: dict[int, int] = {}
    for v2, p2 in inner.items():
        if v2 == c:
            breaker = keep[p2]
            entry = entry_node[breaker]
            result[entry] = breaker
            for v in in_cycle:
                if v != entry:
                    result[v] = parent[v]
        elif p2 == c:
            result[keep[v2]] = enter_from[v2]
        else:
            result[keep[v2]] = keep[p2]
    return result


BRUTE_FORCE_LIMIT = 8


def brute_force_arborescence(g: WeightedDigraph, root: int = 0) -> ExtractedTree:
    """Exhaustive oracle: try every parent assignment, keep the best valid one.

    Refuses graphs with more than BRUTE_FORCE_LIMIT nodes. Deterministic:
    candidates are enumerated in lexicographic parent order and only strictly
    better totals replace the incumbent.
    """
    if g.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refused for n={g.n} > {BRUTE_FORCE_LIMIT}")
    if not 0 <= root < g.n:
        raise ValueError(f"root {root} out of range for {g.n} nodes")
    others = [v for v in range(g.n) if v != root]
    if not others:
        return ExtractedTree(root=root, n=1, edges=())

    best_total = NEG_INF
    best_parent: dict[int, int] | None = None
    choices = [[u for u in range(g.n) if u != v] for v in others]
    for combo in itertools.product(*choices):
        parent = dict(zip(others, combo))
        if not _reaches_root(parent, root):
            continue
        total = sum(g.weights[parent[v], v] for v in sorted(parent))
        if total > best_total:
            best_total = total
            best_parent = parent
    assert best_parent is not None  # complete candidate sets always contain a tree
    tree = _parents_to_tree(g, root, best_parent)
    tree.validate()
    return tree


def _reaches_root(parent: dict[int, int], root: int) -> bool:
    for v in parent:
        seen = set()
        node = v
        while node != root:
            if node in seen:
                return False
            seen.add(node)
            node = parent[node]
    return True
