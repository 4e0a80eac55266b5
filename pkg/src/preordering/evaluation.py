"""Preordering quality metrics: per-sentence tau distributions and label
accuracy against gold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .oracle import Label, kendall_tau

N_BINS = 10


@dataclass
class TauDistribution:
    """Histogram of per-sentence tau over 10 equal bins of [-1, 1].

    Sentences with fewer than 2 aligned tokens are counted in ``n_skipped``
    and excluded from the bins and the summary statistics.
    """

    bin_edges: list[float]
    counts: list[int]
    taus: list[float]
    n_skipped: int
    mean_tau: float
    median_tau: float
    pct_tau_one: float

    @property
    def n_scored(self) -> int:
        return len(self.taus)

    def to_record(self) -> dict:
        return {
            "bin_edges": self.bin_edges,
            "counts": self.counts,
            "n_scored": self.n_scored,
            "n_skipped": self.n_skipped,
            "mean_tau": self.mean_tau,
            "median_tau": self.median_tau,
            "pct_tau_one": self.pct_tau_one,
        }

    def chart(self, width: int = 50) -> str:
        """Plain-text bar chart of the bin counts."""
        top = max(self.counts) if self.counts else 0
        lines = []
        for k, count in enumerate(self.counts):
            lo, hi = self.bin_edges[k], self.bin_edges[k + 1]
            bar = "#" * (round(width * count / top) if top else 0)
            lines.append(f"[{lo:+.1f}, {hi:+.1f}{']' if k == N_BINS - 1 else ')'} "
                         f"{count:6d} {bar}")
        return "\n".join(lines)


def tau_distribution(trees, alignments, permutations=None) -> TauDistribution:
    """Per-sentence tau of (optionally permuted) alignments.

    With ``permutations`` the aligned target indices are read in the
    permuted source order, i.e. the order the preorderer would emit.
    """
    if len(trees) != len(alignments):
        raise DataError(f"{len(trees)} trees but {len(alignments)} alignments")
    if permutations is not None and len(permutations) != len(trees):
        raise DataError(f"{len(trees)} trees but {len(permutations)} permutations")

    edges = [-1.0 + 2.0 * k / N_BINS for k in range(N_BINS + 1)]
    counts = [0] * N_BINS
    taus: list[float] = []
    skipped = 0
    for i, (tree, alignment) in enumerate(zip(trees, alignments)):
        order = (permutations[i].source_order() if permutations is not None
                 else range(tree.n_leaves))
        y = [alignment.links[j] for j in order if alignment.links[j] is not None]
        if len(y) < 2:
            skipped += 1
            continue
        t = kendall_tau(y)
        taus.append(t)
        counts[min(int((t + 1.0) / 0.2), N_BINS - 1)] += 1

    if taus:
        mean = float(np.mean(taus))
        median = float(np.median(taus))
        pct_one = sum(1 for t in taus if t == 1.0) / len(taus)
    else:
        mean = median = pct_one = float("nan")
    return TauDistribution(edges, counts, taus, skipped, mean, median, pct_one)


@dataclass
class LabelAccuracy:
    """Micro-averaged agreement over all internal nodes."""

    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    confusion: dict[str, int]  # keys "SS", "SI", "IS", "II" (gold then predicted)
    total: int = 0

    def to_record(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "confusion": self.confusion,
            "total": self.total,
        }


def label_accuracy(predicted, gold) -> LabelAccuracy:
    """Compare parallel lists of per-tree label dicts node by node."""
    if len(predicted) != len(gold):
        raise DataError(
            f"{len(predicted)} predicted label sets but {len(gold)} gold sets")
    confusion = {"SS": 0, "SI": 0, "IS": 0, "II": 0}
    for i, (pred, ref) in enumerate(zip(predicted, gold)):
        if set(pred) != set(ref):
            raise DataError(f"sentence {i}: predicted and gold label sets "
                            "cover different nodes")
        for nid, g in ref.items():
            confusion[g.char + pred[nid].char] += 1

    total = sum(confusion.values())
    correct = confusion["SS"] + confusion["II"]
    accuracy = correct / total if total else float("nan")

    precision, recall = {}, {}
    for cls in (Label.STRAIGHT, Label.INVERTED):
        c = cls.char
        pred_c = confusion["S" + c] + confusion["I" + c]
        gold_c = confusion[c + "S"] + confusion[c + "I"]
        hit = confusion[c + c]
        precision[c] = hit / pred_c if pred_c else 0.0
        recall[c] = hit / gold_c if gold_c else 0.0
    return LabelAccuracy(accuracy, precision, recall, confusion, total)
