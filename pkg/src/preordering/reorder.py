"""Apply Straight/Inverted labels to a tree: reordered sentence plus the
induced source-side permutation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .model import ModelParams, forward
from .oracle import Label
from .trees import SyntaxTree


@dataclass(frozen=True)
class Permutation:
    """``mapping[i]`` is the new position of original source token i."""

    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f"not a permutation of [0, {len(self.mapping)}): "
                             f"{self.mapping}")

    def source_order(self) -> list[int]:
        """Original token indices in their new left-to-right order."""
        order = [0] * len(self.mapping)
        for orig, new in enumerate(self.mapping):
            order[new] = orig
        return order


def apply_labels(tree: SyntaxTree, labels: dict[int, Label]):
    """In-order traversal that visits an Inverted node's right child first.

    Returns the reordered token sequence and the matching Permutation.
    """
    order: list[int] = []
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        node = tree.nodes[nid]
        if node.is_leaf:
            order.append(node.span[0])
            continue
        if nid not in labels:
            raise DataError(f"missing label for internal node {nid}")
        left, right = node.children
        if labels[nid] is Label.INVERTED:
            left, right = right, left
        stack.append(right)
        stack.append(left)

    by_position = {tree.nodes[i].span[0]: tree.nodes[i].token
                   for i in tree.leaf_ids()}
    tokens = [by_position[orig] for orig in order]
    mapping = [0] * len(order)
    for new, orig in enumerate(order):
        mapping[orig] = new
    return tokens, Permutation(tuple(mapping))


def predict_and_apply(params: ModelParams, tree: SyntaxTree):
    """Forward pass, threshold at 0.5 (ties stay Straight), then reorder.

    Returns (tokens, permutation, predicted labels).
    """
    pred = forward(params, tree)
    labels = {nid: Label.INVERTED if p_inv > 0.5 else Label.STRAIGHT
              for nid, (_, p_inv) in pred.probs.items()}
    tokens, perm = apply_labels(tree, labels)
    return tokens, perm, labels


def read_permutation_file(path, trees) -> list[Permutation]:
    """Read space-separated permutation lines parallel to ``trees``."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) != len(trees):
        raise DataError(
            f"{path}: {len(lines)} permutation lines for {len(trees)} trees")
    perms = []
    for lineno, (line, tree) in enumerate(zip(lines, trees), 1):
        try:
            mapping = tuple(int(x) for x in line.split())
            if len(mapping) != tree.n_leaves:
                raise ValueError(
                    f"{len(mapping)} entries for {tree.n_leaves} tokens")
            perms.append(Permutation(mapping))
        except ValueError as e:
            raise DataError(f"{path}:{lineno}: {e}") from e
    return perms
