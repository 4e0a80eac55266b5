"""Gold Straight/Inverted node labels derived from word alignments.

A node keeps its children in order (Straight) unless swapping them strictly
raises the rank correlation of the aligned target indices (Inverted).
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .alignments import Alignment, target_indices
from .errors import DataError
from .trees import SyntaxTree


class Label(Enum):
    STRAIGHT = 0
    INVERTED = 1

    @property
    def char(self) -> str:
        return "S" if self is Label.STRAIGHT else "I"

    @classmethod
    def from_char(cls, ch: str) -> "Label":
        if ch == "S":
            return cls.STRAIGHT
        if ch == "I":
            return cls.INVERTED
        raise DataError(f"invalid label character {ch!r} (expected S or I)")


def kendall_tau(y) -> float:
    """Rank correlation in [-1, 1] of a target-index sequence.

    Counts strictly ascending pairs, so tied values count against the
    correlation: tau = 4 * #{i<j : y_i < y_j} / (n(n-1)) - 1. A value of 1
    means the sequence is in complete ascending order.
    """
    n = len(y)
    if n < 2:
        raise ValueError("kendall_tau needs at least 2 values")
    a = np.asarray(y)
    i, j = np.triu_indices(n, k=1)
    concordant = int(np.count_nonzero(a[i] < a[j]))
    return 4.0 * concordant / (n * (n - 1)) - 1.0


def gold_label(tree: SyntaxTree, alignment: Alignment, node_id: int) -> Label:
    """Label one internal node from its children's aligned target indices.

    If either child has no aligned token the node is Straight. Otherwise the
    node is Inverted iff the swapped concatenation strictly increases tau;
    ties stay Straight.
    """
    node = tree.nodes[node_id]
    if node.is_leaf:
        raise ValueError(f"node {node_id} is a leaf; leaves carry no label")
    left, right = node.children
    l_idx = target_indices(alignment, tree.nodes[left].span)
    r_idx = target_indices(alignment, tree.nodes[right].span)
    if not l_idx or not r_idx:
        return Label.STRAIGHT
    straight = kendall_tau(l_idx + r_idx)
    inverted = kendall_tau(r_idx + l_idx)
    return Label.INVERTED if inverted > straight else Label.STRAIGHT


def gold_labels(tree: SyntaxTree, alignment: Alignment) -> dict[int, Label]:
    """Label every internal node independently, using original source order."""
    return {nid: gold_label(tree, alignment, nid) for nid in tree.internal_ids()}


def oracle_permutation_tau(tree: SyntaxTree, alignment: Alignment,
                           labels: dict[int, Label]) -> float:
    """Tau of the whole sentence after applying the label-driven reordering.

    Returns 1.0 by convention when fewer than 2 source tokens are aligned.
    """
    from .reorder import apply_labels

    _, perm = apply_labels(tree, labels)
    order = perm.source_order()
    y = [alignment.links[i] for i in order if alignment.links[i] is not None]
    if len(y) < 2:
        return 1.0
    return kendall_tau(y)


def labels_to_line(tree: SyntaxTree, labels: dict[int, Label]) -> str:
    """Serialize labels as S/I characters over internal nodes in pre-order;
    a 1-leaf tree gives an empty line."""
    try:
        return " ".join(labels[nid].char for nid in tree.internal_preorder())
    except KeyError as e:
        raise DataError(f"missing label for internal node {e.args[0]}") from e


def labels_from_line(tree: SyntaxTree, line: str) -> dict[int, Label]:
    """Inverse of labels_to_line for the same tree."""
    chars = line.split()
    order = tree.internal_preorder()
    if len(chars) != len(order):
        raise DataError(
            f"label line has {len(chars)} labels but the tree has "
            f"{len(order)} internal nodes")
    return {nid: Label.from_char(ch) for nid, ch in zip(order, chars)}


def read_labels_file(path, trees) -> list[dict[int, Label]]:
    """Read one label line per tree, parallel to ``trees``."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) != len(trees):
        raise DataError(
            f"{path}: {len(lines)} label lines for {len(trees)} trees")
    out = []
    for lineno, (line, tree) in enumerate(zip(lines, trees), 1):
        try:
            out.append(labels_from_line(tree, line))
        except DataError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    return out
