"""Dense float64 matrices with taped reverse-mode differentiation.

Only what the tree composition network needs: affine maps, the rectifier,
concatenation, softmax cross-entropy, embedding-row lookup, and scalar
add/scale for summing losses. A Tape records primitive ops in execution
order; backward() replays them in exact reverse order, accumulating
gradients into every tensor the tape touched.
"""

from __future__ import annotations

import numpy as np


class Tensor2:
    """A rows x cols float64 matrix plus a gradient slot filled by backward."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"Tensor2 must be 2-D, got shape {arr.shape}")
        self.data = arr
        self.grad: np.ndarray | None = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        return f"Tensor2({self.rows}x{self.cols})"


def _accum(t: Tensor2, g: np.ndarray) -> None:
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)
    else:
        t.grad += g


class Tape:
    """Ordered record of primitive operations for reverse accumulation.

    A tape is single-threaded; distinct tapes may run concurrently over
    shared read-only parameters. Outputs never consumed downstream simply
    contribute no gradient.
    """

    def __init__(self):
        self._steps = []

    def __len__(self) -> int:
        return len(self._steps)

    def affine(self, x: Tensor2, W: Tensor2, b: Tensor2) -> Tensor2:
        """x @ W + b, with the 1-row bias broadcast across x's rows."""
        if x.cols != W.rows or b.rows != 1 or b.cols != W.cols:
            raise ValueError(
                f"affine shape mismatch: x {x.shape} @ W {W.shape} + b {b.shape}")
        out = Tensor2(x.data @ W.data + b.data)

        def back():
            g = out.grad
            if g is None:
                return
            _accum(x, g @ W.data.T)
            _accum(W, x.data.T @ g)
            _accum(b, g.sum(axis=0, keepdims=True))

        self._steps.append(back)
        return out

    def rectifier(self, x: Tensor2) -> Tensor2:
        """Elementwise max(0, x); the subgradient at exactly 0 is 0."""
        out = Tensor2(np.maximum(x.data, 0.0))

        def back():
            if out.grad is None:
                return
            _accum(x, out.grad * (x.data > 0.0))

        self._steps.append(back)
        return out

    def concat(self, a: Tensor2, b: Tensor2, c: Tensor2 | None = None) -> Tensor2:
        """Column-wise concatenation of 2 or 3 tensors with equal row counts."""
        parts = (a, b) if c is None else (a, b, c)
        if any(p.rows != a.rows for p in parts):
            raise ValueError(
                "concat row mismatch: " + " ".join(str(p.shape) for p in parts))
        out = Tensor2(np.concatenate([p.data for p in parts], axis=1))

        def back():
            g = out.grad
            if g is None:
                return
            ofs = 0
            for p in parts:
                _accum(p, g[:, ofs:ofs + p.cols])
                ofs += p.cols

        self._steps.append(back)
        return out

    def embed(self, table: Tensor2, row: int) -> Tensor2:
        """Row lookup into an embedding table; equals one-hot @ table.

        The gradient scatters into that single row only.
        """
        if not 0 <= row < table.rows:
            raise IndexError(f"embedding row {row} out of range [0, {table.rows})")
        out = Tensor2(table.data[row:row + 1].copy())

        def back():
            if out.grad is None:
                return
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            table.grad[row] += out.grad[0]

        self._steps.append(back)
        return out

    def softmax_xent(self, s: Tensor2, label: int):
        """Stabilized softmax over a 1x2 score row plus cross-entropy loss.

        Returns (loss as a 1x1 tensor, probability pair as an ndarray); the
        score gradient is p - onehot(label).
        """
        if s.shape != (1, 2):
            raise ValueError(f"softmax_xent expects a 1x2 score row, got {s.shape}")
        if label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {label}")
        z = s.data[0] - s.data[0].max()
        e = np.exp(z)
        p = e / e.sum()
        out = Tensor2([[-np.log(p[label])]])

        def back():
            if out.grad is None:
                return
            d = p.copy()
            d[label] -= 1.0
            _accum(s, out.grad[0, 0] * d[None, :])

        self._steps.append(back)
        return out, p.copy()

    def add(self, a: Tensor2, b: Tensor2) -> Tensor2:
        if a.shape != b.shape:
            raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
        out = Tensor2(a.data + b.data)

        def back():
            if out.grad is None:
                return
            _accum(a, out.grad)
            _accum(b, out.grad)

        self._steps.append(back)
        return out

    def scale(self, x: Tensor2, c: float) -> Tensor2:
        out = Tensor2(x.data * c)

        def back():
            if out.grad is None:
                return
            _accum(x, out.grad * c)

        self._steps.append(back)
        return out

    def backward(self, loss: Tensor2) -> None:
        """Seed d(loss)/d(loss) = 1 and run reverse accumulation.

        Gradients land in the ``grad`` slots of every tensor involved;
        tensors the loss does not depend on are left untouched.
        """
        if loss.shape != (1, 1):
            raise ValueError(f"backward needs a 1x1 loss, got {loss.shape}")
        loss.grad = np.ones((1, 1))
        for back in reversed(self._steps):
            back()
