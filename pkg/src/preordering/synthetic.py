"""Synthetic trees, alignments, and corpora for tests and demos.

The English-like generator draws from a small PCFG over a 50-word
vocabulary; head-final targets are produced by inverting VP and PP nodes,
the word-order rule the model is expected to learn.
"""

from __future__ import annotations

import numpy as np

from .alignments import Alignment
from .oracle import Label
from .reorder import apply_labels
from .trees import RawNode, SyntaxTree, from_raw

WORD_POOLS = {
    "DT": ["the", "a", "this"],
    "PRP$": ["my", "his", "her"],
    "JJ": ["big", "small", "red", "old", "new", "quiet"],
    "NN": ["cat", "dog", "man", "woman", "park", "house", "book", "tree",
           "car", "river", "city", "garden", "bird", "table", "road",
           "bridge", "field", "store", "boat", "hill"],
    "VB": ["saw", "likes", "found", "put", "made", "took", "gave", "read",
           "held", "left"],
    "IN": ["in", "on", "under", "near", "with", "from", "behind", "beside"],
}

INVERTED_TAGS = ("VP", "PP")


def _pick(rng: np.random.Generator, pool) -> str:
    return pool[int(rng.integers(len(pool)))]


def _leaf(rng, pos: str) -> RawNode:
    return RawNode(pos, token=_pick(rng, WORD_POOLS[pos]))


def _np(rng, depth: int) -> RawNode:
    r = rng.random()
    if depth > 0 and r < 0.25:
        return RawNode("NP", [_np(rng, depth - 1), _pp(rng, depth - 1)])
    if r < 0.6:
        return RawNode("NP", [_leaf(rng, "DT"), _leaf(rng, "NN")])
    if r < 0.8:
        return RawNode("NP", [_leaf(rng, "JJ"), _leaf(rng, "NN")])
    return RawNode("NP", [_leaf(rng, "PRP$"), _leaf(rng, "NN")])


def _pp(rng, depth: int) -> RawNode:
    return RawNode("PP", [_leaf(rng, "IN"), _np(rng, max(depth - 1, 0))])


def _vp(rng, depth: int) -> RawNode:
    r = rng.random()
    if depth > 0 and r < 0.35:
        return RawNode("VP", [_vp(rng, depth - 1), _pp(rng, depth - 1)])
    if r < 0.75:
        return RawNode("VP", [_leaf(rng, "VB"), _np(rng, depth - 1)])
    return RawNode("VP", [_leaf(rng, "VB"), _pp(rng, depth - 1)])


def english_like_tree(rng: np.random.Generator, depth: int = 3) -> SyntaxTree:
    """A random subject-verb sentence tree, roughly 5 to 15 leaves."""
    return from_raw(RawNode("S", [_np(rng, depth - 1), _vp(rng, depth)]))


def rule_labels(tree: SyntaxTree,
                inverted_tags=INVERTED_TAGS) -> dict[int, Label]:
    """Deterministic labels: Inverted iff the node category is listed."""
    inverted = set(inverted_tags)
    return {nid: Label.INVERTED if tree.nodes[nid].tag in inverted
            else Label.STRAIGHT for nid in tree.internal_ids()}


def head_final_example(rng: np.random.Generator, depth: int = 3,
                       dropout: float = 0.1):
    """(tree, alignment) where the target order inverts VP/PP nodes and each
    source token loses its link with probability ``dropout``."""
    tree = english_like_tree(rng, depth)
    _, perm = apply_labels(tree, rule_labels(tree))
    n = tree.n_leaves
    links = tuple(perm.mapping[i] if rng.random() >= dropout else None
                  for i in range(n))
    return tree, Alignment(links, n, n)


def head_final_corpus(rng: np.random.Generator, n_sentences: int,
                      depth: int = 3, dropout: float = 0.1):
    return [head_final_example(rng, depth, dropout) for _ in range(n_sentences)]


def rule_corpus(rng: np.random.Generator, n_sentences: int, depth: int = 3):
    """(tree, rule labels) pairs for rule-learnability experiments."""
    out = []
    for _ in range(n_sentences):
        tree = english_like_tree(rng, depth)
        out.append((tree, rule_labels(tree)))
    return out


def random_binary_tree(rng: np.random.Generator, n_leaves: int,
                       tags=("A", "B", "C", "D"),
                       words=None) -> SyntaxTree:
    """Uniformly random split topology with tags and words from small pools."""
    if words is None:
        words = [f"w{i}" for i in range(20)]

    def build(n: int) -> RawNode:
        if n == 1:
            return RawNode(_pick(rng, tags), token=_pick(rng, words))
        k = int(rng.integers(1, n))
        return RawNode(_pick(rng, tags), [build(k), build(n - k)])

    return from_raw(build(n_leaves))


def random_nary_raw(rng: np.random.Generator, n_leaves: int,
                    max_arity: int = 4, tags=("X", "Y", "Z")) -> RawNode:
    """Random n-ary raw tree whose leaf tokens read t0, t1, ... in order."""
    counter = [0]

    def build(n: int) -> RawNode:
        if n == 1:
            tok = f"t{counter[0]}"
            counter[0] += 1
            return RawNode("T", token=tok)
        arity = int(rng.integers(2, min(max_arity, n) + 1))
        cuts = sorted(rng.choice(np.arange(1, n), size=arity - 1, replace=False))
        bounds = [0, *map(int, cuts), n]
        return RawNode(_pick(rng, tags),
                       [build(bounds[i + 1] - bounds[i]) for i in range(arity)])

    return build(n_leaves)


def random_partial_alignment(rng: np.random.Generator, source_len: int,
                             target_len: int | None = None,
                             p_unaligned: float = 0.3,
                             min_aligned: int = 0) -> Alignment:
    """Random alignment with optional duplicate targets and unaligned gaps."""
    if target_len is None:
        target_len = source_len
    while True:
        links = tuple(int(rng.integers(target_len))
                      if rng.random() >= p_unaligned else None
                      for _ in range(source_len))
        if sum(1 for t in links if t is not None) >= min_aligned:
            return Alignment(links, source_len, target_len)
