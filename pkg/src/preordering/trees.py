"""Bracketed syntax trees: parsing, binarization, serialization, vocabularies.

Trees arrive one per line in Penn-style bracket notation and are normalized
to strictly binary form: unary chains are collapsed on load, and nodes with
more than two children are either rejected or right-binarized on request.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import DataError, TreeParseError

UNK = "<unk>"

_ATOM = re.compile(r"[^\s()]+")


@dataclass
class RawNode:
    """Node of an unvalidated n-ary parse; ``token`` is set on leaves only."""

    tag: str
    children: list[RawNode] = field(default_factory=list)
    token: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.token is not None


@dataclass(frozen=True)
class Node:
    tag: str
    children: tuple[int, ...]  # () for leaves, (left, right) otherwise
    token: str | None  # leaves only
    span: tuple[int, int]  # half-open source-token range

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class SyntaxTree:
    """Binary parse indexed by node id; children always precede their parent.

    Leaf spans are [i, i+1) left to right; an internal node's span is the
    union of its children's adjacent spans.
    """

    nodes: tuple[Node, ...]
    root: int

    @property
    def n_leaves(self) -> int:
        return self.nodes[self.root].span[1]

    def leaf_ids(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.is_leaf]

    def internal_ids(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if not n.is_leaf]

    def preorder(self) -> list[int]:
        """All node ids, root first, left subtree before right."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            nid = stack.pop()
            out.append(nid)
            node = self.nodes[nid]
            if node.children:
                stack.append(node.children[1])
                stack.append(node.children[0])
        return out

    def internal_preorder(self) -> list[int]:
        return [i for i in self.preorder() if not self.nodes[i].is_leaf]


def parse_raw(line: str) -> RawNode:
    """Parse one bracketed expression into an n-ary RawNode tree.

    Raises TreeParseError with a character offset on malformed input.
    """
    node, end = _parse_node(line, _skip_ws(line, 0))
    end = _skip_ws(line, end)
    if end != len(line):
        raise TreeParseError("trailing text after tree", offset=end)
    return node


def _skip_ws(line: str, i: int) -> int:
    while i < len(line) and line[i].isspace():
        i += 1
    return i


def _parse_node(line: str, i: int):
    if i >= len(line) or line[i] != "(":
        raise TreeParseError("expected '('", offset=i)
    i = _skip_ws(line, i + 1)
    m = _ATOM.match(line, i)
    if m is None:
        raise TreeParseError("expected a node tag", offset=i)
    node = RawNode(m.group())
    i = _skip_ws(line, m.end())
    while i < len(line) and line[i] != ")":
        if line[i] == "(":
            child, i = _parse_node(line, i)
            node.children.append(child)
        else:
            m = _ATOM.match(line, i)
            if node.token is not None:
                raise TreeParseError(
                    f"multiple tokens under '{node.tag}'", offset=i)
            node.token = m.group()
            i = m.end()
        i = _skip_ws(line, i)
    if i >= len(line):
        raise TreeParseError("unbalanced brackets: missing ')'", offset=len(line))
    if node.token is not None and node.children:
        raise TreeParseError(
            f"node '{node.tag}' mixes a token with child nodes", offset=i)
    if node.token is None and not node.children:
        raise TreeParseError(f"empty node '{node.tag}'", offset=i)
    return node, i + 1


def collapse_unary(node: RawNode) -> RawNode:
    """Collapse unary chains.

    A chain ending at a leaf keeps the bottom-most preterminal tag; an
    internal chain keeps the topmost category.
    """
    while len(node.children) == 1:
        child = node.children[0]
        if child.is_leaf:
            node = child
        else:
            node = RawNode(node.tag, child.children)
    if node.is_leaf:
        return node
    return RawNode(node.tag, [collapse_unary(c) for c in node.children])


def binarize(node: RawNode) -> RawNode:
    """Right-binarize: (X a b c) becomes (X a (X| b c)).

    Intermediate nodes are tagged with the parent category plus ``|``.
    Binary input comes back structurally identical; leaf order is preserved.
    """
    if node.is_leaf:
        return node
    children = [binarize(c) for c in node.children]
    while len(children) > 2:
        merged = RawNode(node.tag + "|", children[-2:])
        children = children[:-2] + [merged]
    return RawNode(node.tag, children)


def from_raw(raw: RawNode, auto_binarize: bool = False) -> SyntaxTree:
    """Normalize a raw parse into a SyntaxTree: collapse unary chains,
    optionally right-binarize, compute spans, and index the nodes."""
    raw = collapse_unary(raw)
    if auto_binarize:
        raw = binarize(raw)
    nodes: list[Node] = []

    def build(r: RawNode, lo: int):
        if r.is_leaf:
            nodes.append(Node(r.tag, (), r.token, (lo, lo + 1)))
            return len(nodes) - 1, lo + 1
        if len(r.children) != 2:
            raise TreeParseError(
                f"node '{r.tag}' has {len(r.children)} children; "
                "input must be binary (or request binarization)")
        left, mid = build(r.children[0], lo)
        right, hi = build(r.children[1], mid)
        nodes.append(Node(r.tag, (left, right), None, (lo, hi)))
        return len(nodes) - 1, hi

    root, _ = build(raw, 0)
    return SyntaxTree(tuple(nodes), root)


def parse_tree(line: str, auto_binarize: bool = False) -> SyntaxTree:
    """Parse one bracketed line into a validated binary SyntaxTree."""
    return from_raw(parse_raw(line), auto_binarize=auto_binarize)


def serialize(tree: SyntaxTree) -> str:
    """Render a tree back to one bracketed line; inverse of parse_tree."""

    def rec(nid: int) -> str:
        n = tree.nodes[nid]
        if n.is_leaf:
            return f"({n.tag} {n.token})"
        left, right = n.children
        return f"({n.tag} {rec(left)} {rec(right)})"

    return rec(tree.root)


def leaves_in_order(tree: SyntaxTree) -> list[str]:
    """Leaf tokens left to right."""
    return [tree.nodes[i].token for i in tree.leaf_ids()]


class Vocab:
    """Dense token-to-id map; id 0 is reserved for unknown tokens."""

    def __init__(self, entries):
        entries = tuple(entries)
        if not entries or entries[0] != UNK:
            raise ValueError(f"vocabulary must start with the {UNK!r} entry")
        if len(set(entries)) != len(entries):
            raise ValueError("duplicate vocabulary entries")
        self.entries = entries
        self._ids = {tok: i for i, tok in enumerate(entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.entries == other.entries

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def id(self, token: str) -> int:
        """Id of a token, falling back to the UNK id 0."""
        return self._ids.get(token, 0)

    def token(self, i: int) -> str:
        return self.entries[i]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self.entries):
                fh.write(f"{tok}\t{i}\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        entries = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                tok, sep, sid = line.rstrip("\n").partition("\t")
                if not sep or not sid.isdigit() or int(sid) != lineno - 1:
                    raise DataError(
                        f"{path}:{lineno}: vocab lines must be 'token<TAB>id' "
                        "with dense ids in order")
                entries.append(tok)
        try:
            return cls(entries)
        except ValueError as e:
            raise DataError(f"{path}: {e}") from e


def build_vocab(corpus, limit: int) -> Vocab:
    """Keep the ``limit - 1`` most frequent tokens plus UNK.

    Frequency ties break by first occurrence, so the result is deterministic
    for a fixed corpus order.
    """
    if limit < 1:
        raise ValueError("vocabulary limit must be >= 1")
    counts: Counter[str] = Counter()
    first: dict[str, int] = {}
    for seq in corpus:
        for tok in seq:
            if tok not in first:
                first[tok] = len(first)
            counts[tok] += 1
    if not counts:
        raise DataError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts, key=lambda t: (-counts[t], first[t]))
    kept = [t for t in ranked if t != UNK][: limit - 1]
    return Vocab((UNK, *kept))


def read_tree_file(path, auto_binarize: bool = False) -> list[SyntaxTree]:
    """Read one bracketed tree per line; parse errors carry line numbers."""
    trees = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped:
                raise DataError(f"{path}:{lineno}: empty line in tree file")
            try:
                trees.append(parse_tree(stripped, auto_binarize=auto_binarize))
            except TreeParseError as e:
                raise DataError(f"{path}:{lineno}: {e}") from e
    return trees
