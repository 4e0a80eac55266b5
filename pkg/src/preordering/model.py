"""Recursive tree network: leaf embeddings, bottom-up composition, and
per-node Straight/Inverted scores.

Leaves map a word embedding through a rectified linear layer; each internal
node composes its two child vectors (optionally together with an embedding
of the node's own tag) and feeds the result to a 2-way output layer.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ModelFormatError
from .nncore import Tape, Tensor2
from .oracle import Label
from .trees import UNK, SyntaxTree, Vocab

_MAGIC = b"PREORDNN"
_VERSION = 1

# Canonical parameter order, used for initialization draws, serialization,
# and gradient collection.
_ORDER = ("W_E", "T_E", "W_l", "b_l", "W", "b", "W_t", "b_t", "W_s", "b_s")

# Weight matrices subject to weight decay; biases and embedding tables are
# excluded.
DECAYED = frozenset({"W_l", "W", "W_t", "W_s"})


class ModelParams:
    """All weights of the preordering network plus its vocabularies.

    Exactly one composition path exists per configuration: the plain
    (W, b) path, or the tag path (W_t, b_t) with a shared tag-embedding
    table over POS tags and syntactic categories. With ``leaf_tags`` the
    leaf transform also sees the leaf's tag embedding (W_l widened to
    2*lam rows).
    """

    def __init__(self, lam: int, word_vocab: Vocab, tag_vocab: Vocab,
                 use_tags: bool, leaf_tags: bool, tensors: dict[str, Tensor2]):
        self.lam = lam
        self.word_vocab = word_vocab
        self.tag_vocab = tag_vocab
        self.use_tags = use_tags
        self.leaf_tags = leaf_tags
        for name in _ORDER:
            setattr(self, name, tensors.get(name))
        self._check_shapes()

    def _expected_shapes(self) -> dict[str, tuple[int, int]]:
        lam = self.lam
        leaf_in = 2 * lam if (self.use_tags and self.leaf_tags) else lam
        shapes = {
            "W_E": (len(self.word_vocab), lam),
            "W_l": (leaf_in, lam),
            "b_l": (1, lam),
            "W_s": (lam, 2),
            "b_s": (1, 2),
        }
        if self.use_tags:
            shapes["T_E"] = (len(self.tag_vocab), lam)
            shapes["W_t"] = (3 * lam, lam)
            shapes["b_t"] = (1, lam)
        else:
            shapes["W"] = (2 * lam, lam)
            shapes["b"] = (1, lam)
        return shapes

    def _check_shapes(self) -> None:
        expected = self._expected_shapes()
        for name in _ORDER:
            t = getattr(self, name)
            if name in expected:
                if t is None or t.shape != expected[name]:
                    got = None if t is None else t.shape
                    raise ValueError(
                        f"parameter {name} must have shape {expected[name]}, got {got}")
            elif t is not None:
                raise ValueError(f"parameter {name} is unused in this configuration")

    def named_parameters(self):
        """(name, tensor) pairs in canonical order, skipping unused slots."""
        return [(name, getattr(self, name)) for name in _ORDER
                if getattr(self, name) is not None]

    def zero_grad(self) -> None:
        for _, t in self.named_parameters():
            t.zero_grad()

    def collect_grads(self) -> dict[str, np.ndarray]:
        """Per-parameter gradients after backward; untouched parameters get zeros."""
        out = {}
        for name, t in self.named_parameters():
            out[name] = np.zeros_like(t.data) if t.grad is None else t.grad.copy()
        return out

    def n_params(self) -> int:
        return sum(t.data.size for _, t in self.named_parameters())

    def copy(self) -> "ModelParams":
        tensors = {name: Tensor2(t.data.copy()) for name, t in self.named_parameters()}
        return ModelParams(self.lam, self.word_vocab, self.tag_vocab,
                           self.use_tags, self.leaf_tags, tensors)

    def save(self, path) -> None:
        save_model(self, path)

    @classmethod
    def load(cls, path) -> "ModelParams":
        return load_model(path)


def init_params(lam: int, word_vocab: Vocab, tag_vocab: Vocab | None,
                use_tags: bool, seed: int, leaf_tags: bool = True) -> ModelParams:
    """Fresh parameters: weights uniform in +-sqrt(6 / (fan_in + fan_out)),
    biases zero. Draws happen in canonical parameter order, so a seed pins
    the entire parameter set."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    if tag_vocab is None:
        tag_vocab = Vocab([UNK])
    rng = np.random.default_rng(seed)

    def glorot(rows, cols):
        limit = np.sqrt(6.0 / (rows + cols))
        return Tensor2(rng.uniform(-limit, limit, size=(rows, cols)))

    leaf_in = 2 * lam if (use_tags and leaf_tags) else lam
    tensors = {"W_E": glorot(len(word_vocab), lam)}
    if use_tags:
        tensors["T_E"] = glorot(len(tag_vocab), lam)
    tensors["W_l"] = glorot(leaf_in, lam)
    tensors["b_l"] = Tensor2(np.zeros((1, lam)))
    if use_tags:
        tensors["W_t"] = glorot(3 * lam, lam)
        tensors["b_t"] = Tensor2(np.zeros((1, lam)))
    else:
        tensors["W"] = glorot(2 * lam, lam)
        tensors["b"] = Tensor2(np.zeros((1, lam)))
    tensors["W_s"] = glorot(lam, 2)
    tensors["b_s"] = Tensor2(np.zeros((1, 2)))
    return ModelParams(lam, word_vocab, tag_vocab, use_tags, leaf_tags, tensors)


def _leaf(params: ModelParams, tape: Tape, token_id: int,
          tag_id: int | None) -> Tensor2:
    e = tape.embed(params.W_E, token_id)
    if params.use_tags and params.leaf_tags:
        if tag_id is None:
            raise ValueError("leaf tag id required when leaf tags are enabled")
        e = tape.concat(e, tape.embed(params.T_E, tag_id))
    return tape.rectifier(tape.affine(e, params.W_l, params.b_l))


def _compose(params: ModelParams, tape: Tape, p_l: Tensor2, p_r: Tensor2,
             tag_id: int | None) -> Tensor2:
    if params.use_tags:
        if tag_id is None:
            raise ValueError("tag id required for the tag-composition path")
        h = tape.concat(p_l, p_r, tape.embed(params.T_E, tag_id))
        return tape.rectifier(tape.affine(h, params.W_t, params.b_t))
    h = tape.concat(p_l, p_r)
    return tape.rectifier(tape.affine(h, params.W, params.b))


def leaf_vector(params: ModelParams, token_id: int,
                tag_id: int | None = None) -> np.ndarray:
    """Leaf representation as a lam-vector (rectified embedding transform)."""
    return _leaf(params, Tape(), token_id, tag_id).data[0].copy()


def compose(params: ModelParams, p_l: np.ndarray, p_r: np.ndarray,
            tag_id: int | None = None) -> np.ndarray:
    """Parent representation from two lam-dim child vectors."""
    tape = Tape()
    out = _compose(params, tape, Tensor2(np.asarray(p_l).reshape(1, -1)),
                   Tensor2(np.asarray(p_r).reshape(1, -1)), tag_id)
    return out.data[0].copy()


def _compose_tree(params: ModelParams, tree: SyntaxTree, tape: Tape):
    """Bottom-up vectors for every node and scores for every internal node.

    Node ids are post-ordered (children precede parents), so a single pass
    in id order respects all dependencies.
    """
    vecs: dict[int, Tensor2] = {}
    scores: dict[int, Tensor2] = {}
    vocab, tags = params.word_vocab, params.tag_vocab
    for nid, node in enumerate(tree.nodes):
        if node.is_leaf:
            tag_id = tags.id(node.tag) if params.use_tags else None
            vecs[nid] = _leaf(params, tape, vocab.id(node.token), tag_id)
        else:
            left, right = node.children
            tag_id = tags.id(node.tag) if params.use_tags else None
            vecs[nid] = _compose(params, tape, vecs[left], vecs[right], tag_id)
            scores[nid] = tape.affine(vecs[nid], params.W_s, params.b_s)
    return vecs, scores


def _softmax2(s: np.ndarray) -> tuple[float, float]:
    z = s - s.max()
    e = np.exp(z)
    p = e / e.sum()
    return float(p[0]), float(p[1])


@dataclass
class NodePrediction:
    """Per internal node a (straight, inverted) probability pair; per node
    the composed lam-dim vector."""

    probs: dict[int, tuple[float, float]]
    vectors: dict[int, np.ndarray]


def forward(params: ModelParams, tree: SyntaxTree) -> NodePrediction:
    """Bottom-up pass over one tree; out-of-vocabulary words and unseen tags
    fall back to the UNK rows. A 1-leaf tree yields no predictions."""
    vecs, scores = _compose_tree(params, tree, Tape())
    probs = {nid: _softmax2(s.data[0]) for nid, s in scores.items()}
    vectors = {nid: v.data[0].copy() for nid, v in vecs.items()}
    return NodePrediction(probs, vectors)


def tree_loss(params: ModelParams, tree: SyntaxTree,
              labels: dict[int, Label]) -> float:
    """Sum over internal nodes of -log p(gold label); 0.0 for 1-leaf trees."""
    pred = forward(params, tree)
    total = 0.0
    for nid in tree.internal_ids():
        if nid not in labels:
            raise DataError(f"missing gold label for internal node {nid}")
        total += -np.log(pred.probs[nid][labels[nid].value])
    return float(total)


def batch_loss(params: ModelParams, batch) -> tuple[float, dict[str, np.ndarray]]:
    """Mini-batch cross-entropy: node losses summed over every tree in the
    batch, divided by the batch size K. Returns the loss value and
    per-parameter gradients (zeros for parameters the batch never touches).
    """
    if not batch:
        raise ValueError("batch must contain at least one tree")
    tape = Tape()
    total: Tensor2 | None = None
    for tree, labels in batch:
        if not tree.internal_ids():
            continue
        _, scores = _compose_tree(params, tree, tape)
        for nid in sorted(scores):
            if nid not in labels:
                raise DataError(f"missing gold label for internal node {nid}")
            node_loss, _ = tape.softmax_xent(scores[nid], labels[nid].value)
            total = node_loss if total is None else tape.add(total, node_loss)
    if total is None:
        return 0.0, {name: np.zeros_like(t.data) for name, t in params.named_parameters()}
    mean = tape.scale(total, 1.0 / len(batch))
    params.zero_grad()
    tape.backward(mean)
    return float(mean.data[0, 0]), params.collect_grads()


def save_model(params: ModelParams, path) -> None:
    """Write a versioned binary container; byte-identical across runs for
    identical parameters."""
    names = [name for name, _ in params.named_parameters()]
    header = {
        "lambda": params.lam,
        "use_tags": params.use_tags,
        "leaf_tags": params.leaf_tags,
        "word_vocab": list(params.word_vocab.entries),
        "tag_vocab": list(params.tag_vocab.entries),
        "tensors": [[name, *getattr(params, name).shape] for name in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(blob)))
        fh.write(blob)
        for name in names:
            arr = getattr(params, name).data
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> ModelParams:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ModelFormatError(f"{path}: not a model file (bad magic)")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != _VERSION:
            raise ModelFormatError(
                f"{path}: unsupported model file version {version} "
                f"(this build reads version {_VERSION})")
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except ValueError as e:
            raise ModelFormatError(f"{path}: corrupt header: {e}") from e
        tensors = {}
        for name, rows, cols in header["tensors"]:
            raw = fh.read(rows * cols * 8)
            if len(raw) != rows * cols * 8:
                raise ModelFormatError(f"{path}: truncated payload for {name}")
            arr = np.frombuffer(raw, dtype="<f8").reshape(rows, cols).copy()
            tensors[name] = Tensor2(arr)
        if fh.read(1):
            raise ModelFormatError(f"{path}: trailing bytes after payload")
    try:
        return ModelParams(
            header["lambda"], Vocab(header["word_vocab"]), Vocab(header["tag_vocab"]),
            header["use_tags"], header["leaf_tags"], tensors)
    except (KeyError, ValueError) as e:
        raise ModelFormatError(f"{path}: invalid model contents: {e}") from e
