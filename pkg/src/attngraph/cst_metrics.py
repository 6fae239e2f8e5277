"""Concrete-syntax-tree evaluation of extracted graphs: tree distance,
sequence distance and last-common-parent statistics.

The CST comes from parso. Two normalizations are applied before indexing:

* pure-formatting leaves (newline, indent, dedent, endmarker, whitespace-only
  error leaves) are pruned; they carry no lexeme,
* a ``simple_stmt`` wrapper that only groups one small statement with its
  (pruned) trailing newline is collapsed into that statement; it is a
  parsing artifact, not a construct of the language.

After normalization the tree distance between the ``def`` and ``return``
keywords of a minimal function is 3 (function definition, suite, return
statement), and sibling lexemes are at distance 1.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import parso

from .graph_build import ProgramGraph

_FORMATTING_LEAF_TYPES = {"newline", "indent", "dedent", "endmarker"}


class CstParseError(ValueError):
    """Source could not be parsed into a usable CST (or has no lexemes)."""


@dataclass
class CstNode:
    type: str
    parent: "CstNode | None" = None
    children: list["CstNode"] = field(default_factory=list)
    value: str | None = None  # set on leaves only
    start: tuple[int, int] | None = None
    depth: int = 0


@dataclass
class CstIndex:
    """Normalized CST with leaf list in source order and token->leaf mapping."""

    root: CstNode
    leaves: list[CstNode]
    leaf_map: dict[int, CstNode]  # word token index -> leaf
    unmapped_tokens: list[int]  # token indices with no CST lexeme

    def mapped(self, token_index: int) -> bool:
        return token_index in self.leaf_map


def _convert(node, parent: CstNode | None) -> CstNode | None:
    children = getattr(node, "children", None)
    if children is None:
        if node.type in _FORMATTING_LEAF_TYPES:
            return None
        value = node.value
        if node.type == "error_leaf" and not value.strip():
            return None
        if value == "":
            return None
        return CstNode(type=node.type, parent=parent, value=value, start=node.start_pos)
    out = CstNode(type=node.type, parent=parent)
    kids = []
    for child in children:
        converted = _convert(child, out)
        if converted is not None:
            kids.append(converted)
    if not kids:
        return None
    if node.type == "simple_stmt" and len(kids) == 1:
        kids[0].parent = parent
        return kids[0]
    out.children = kids
    return out


def _set_depths(node: CstNode, depth: int = 0) -> None:
    node.depth = depth
    for child in node.children:
        _set_depths(child, depth + 1)


def _collect_leaves(node: CstNode, out: list[CstNode]) -> None:
    if not node.children:
        out.append(node)
        return
    for child in node.children:
        _collect_leaves(child, out)


def parse_cst(source_text: str, word_tokens=None) -> CstIndex:
    """Parse Python source and align word tokens to CST lexemes.

    Alignment is greedy in-order exact string matching, so synthetic format
    symbols (``#NEWLINE#`` etc.) and any token the grammar does not lex end
    up in ``unmapped_tokens`` rather than aborting.
    """
    tree = parso.parse(source_text)
    root = _convert(tree, None)
    if root is None:
        raise CstParseError("source has no lexemes")
    if not root.children and root.value is None:
        raise CstParseError("source has no lexemes")
    _set_depths(root)
    leaves: list[CstNode] = []
    _collect_leaves(root, leaves)

    leaf_map: dict[int, CstNode] = {}
    unmapped: list[int] = []
    if word_tokens is not None:
        cursor = 0
        for i, tok in enumerate(word_tokens):
            j = cursor
            while j < len(leaves) and leaves[j].value != tok:
                j += 1
            if j < len(leaves):
                leaf_map[i] = leaves[j]
                cursor = j + 1
            else:
                unmapped.append(i)
    return CstIndex(root=root, leaves=leaves, leaf_map=leaf_map, unmapped_tokens=unmapped)


class UnmappedTokenError(KeyError):
    """Token has no CST leaf; the edge is excluded from statistics."""


def _leaf(cst: CstIndex, token_index: int) -> CstNode:
    try:
        return cst.leaf_map[token_index]
    except KeyError:
        raise UnmappedTokenError(token_index) from None


def _lca(a: CstNode, b: CstNode) -> CstNode:
    while a.depth > b.depth:
        a = a.parent
    while b.depth > a.depth:
        b = b.parent
    while a is not b:
        a = a.parent
        b = b.parent
    return a


def tree_distance(cst: CstIndex, u: int, v: int) -> int:
    """Number of non-endpoint nodes on the unique leaf-to-leaf CST path."""
    if u == v:
        return 0
    lu, lv = _leaf(cst, u), _leaf(cst, v)
    lca = _lca(lu, lv)
    # path node count minus the two endpoint leaves
    return (lu.depth - lca.depth) + (lv.depth - lca.depth) - 1


def last_common_parent(cst: CstIndex, u: int, v: int) -> str:
    """Node type of the lowest common ancestor of the two leaves.

    For u = v this is the leaf's own parent type (degenerate convention).
    """
    lu, lv = _leaf(cst, u), _leaf(cst, v)
    if u == v:
        return lu.parent.type if lu.parent is not None else lu.type
    return _lca(lu, lv).type


@dataclass(frozen=True)
class EdgeEvaluation:
    edge: tuple[int, int]
    tree_distance: int
    sequence_distance: int
    last_common_parent_type: str


@dataclass
class GraphEvaluation:
    evaluations: list[EdgeEvaluation]
    tree_distance_hist: Counter
    joint_hist: Counter  # (tree_distance, sequence_distance) -> count
    parent_type_hist: Counter
    unmapped_edges: int

    def top_parent_types(self, k: int = 10) -> list[tuple[str, int]]:
        return self.parent_type_hist.most_common(k)


def evaluate_graph(graph: ProgramGraph, cst: CstIndex) -> GraphEvaluation:
    """Evaluate every forward tree edge of the graph against the CST.

    Edges with an unmapped or masked endpoint are tallied separately and
    excluded from the histograms.
    """
    evaluations: list[EdgeEvaluation] = []
    unmapped = 0
    for src, dst, _tid in graph.tree_edges():
        if (
            src in graph.masked_nodes
            or dst in graph.masked_nodes
            or not cst.mapped(src)
            or not cst.mapped(dst)
        ):
            unmapped += 1
            continue
        evaluations.append(
            EdgeEvaluation(
                edge=(src, dst),
                tree_distance=tree_distance(cst, src, dst),
                sequence_distance=abs(src - dst),
                last_common_parent_type=last_common_parent(cst, src, dst),
            )
        )
    return GraphEvaluation(
        evaluations=evaluations,
        tree_distance_hist=Counter(e.tree_distance for e in evaluations),
        joint_hist=Counter((e.tree_distance, e.sequence_distance) for e in evaluations),
        parent_type_hist=Counter(e.last_common_parent_type for e in evaluations),
        unmapped_edges=unmapped,
    )


def merge_evaluations(parts: list[GraphEvaluation]) -> GraphEvaluation:
    """Order-independent merge of per-sample evaluations for corpus runs."""
    merged = GraphEvaluation([], Counter(), Counter(), Counter(), 0)
    for part in parts:
        merged.evaluations.extend(part.evaluations)
        merged.tree_distance_hist.update(part.tree_distance_hist)
        merged.joint_hist.update(part.joint_hist)
        merged.parent_type_hist.update(part.parent_type_hist)
        merged.unmapped_edges += part.unmapped_edges
    return merged
