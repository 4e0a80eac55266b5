"""Mini-batch training: Adam with weight decay and global-norm gradient
clipping, per-epoch dev evaluation, and selection of the lowest-dev-loss
epoch."""

from __future__ import annotations

import json
import math
import os
import shutil
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError
from .model import DECAYED, ModelParams, batch_loss, init_params, tree_loss
from .trees import Vocab


@dataclass
class TrainConfig:
    batch_size: int = 500
    max_epochs: int = 5
    lam: int = 200
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    weight_decay: float = 1e-4
    clip_norm: float = 5.0
    seed: int = 0
    use_tags: bool = False
    leaf_tags: bool = True
    decoupled_decay: bool = False

    def validate(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.lam < 1:
            raise ValueError("lam must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.adam_beta1 < 1 or not 0 < self.adam_beta2 < 1:
            raise ValueError("adam betas must lie in (0, 1)")
        if self.adam_eps <= 0:
            raise ValueError("adam_eps must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")


@dataclass
class TrainReport:
    """Per-epoch losses and timing; ``selected_epoch`` is the 1-based argmin
    of the dev loss (first occurrence on ties)."""

    train_losses: list[float] = field(default_factory=list)
    dev_losses: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)
    selected_epoch: int = 0

    def canonical_json(self) -> str:
        """Deterministic serialization: wall-clock timing is measurement
        noise and is excluded."""
        return json.dumps({
            "train_losses": self.train_losses,
            "dev_losses": self.dev_losses,
            "selected_epoch": self.selected_epoch,
        }, sort_keys=True)


class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    def __init__(self, params: ModelParams):
        self.step = 0
        self.m = {name: np.zeros_like(t.data) for name, t in params.named_parameters()}
        self.v = {name: np.zeros_like(t.data) for name, t in params.named_parameters()}


def adam_step(params: ModelParams, grads: dict[str, np.ndarray],
              state: AdamState, config: TrainConfig) -> None:
    """One optimizer step, in place.

    Coupled weight decay adds decay * theta to weight-matrix gradients
    before clipping (biases and embedding tables are never decayed);
    decoupled decay instead shrinks those weights directly at update time.
    Clipping rescales the whole gradient set when its global norm exceeds
    ``clip_norm``.
    """
    named = params.named_parameters()
    effective: dict[str, np.ndarray] = {}
    for name, t in named:
        g = grads[name]
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name}")
        if (config.weight_decay and not config.decoupled_decay
                and name in DECAYED):
            g = g + config.weight_decay * t.data
        effective[name] = g

    gnorm = math.sqrt(sum(float(np.sum(g * g)) for g in effective.values()))
    if gnorm > config.clip_norm:
        factor = config.clip_norm / gnorm
        effective = {name: g * factor for name, g in effective.items()}

    state.step += 1
    bc1 = 1.0 - config.adam_beta1 ** state.step
    bc2 = 1.0 - config.adam_beta2 ** state.step
    for name, t in named:
        g = effective[name]
        m, v = state.m[name], state.v[name]
        m *= config.adam_beta1
        m += (1.0 - config.adam_beta1) * g
        v *= config.adam_beta2
        v += (1.0 - config.adam_beta2) * (g * g)
        update = config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.adam_eps)
        if (config.weight_decay and config.decoupled_decay and name in DECAYED):
            t.data -= config.learning_rate * config.weight_decay * t.data
        t.data -= update


def evaluate_loss(params: ModelParams, dataset) -> float:
    """Mean per-tree loss over (tree, labels) pairs.

    Summing per-tree losses with fsum makes the value exactly invariant to
    dataset order and batching; it equals the batch-size-weighted mean of
    per-batch losses.
    """
    if not dataset:
        raise ValueError("cannot evaluate the loss of an empty dataset")
    total = math.fsum(tree_loss(params, tree, labels) for tree, labels in dataset)
    return total / len(dataset)


def train(train_set, dev_set, config: TrainConfig, word_vocab: Vocab,
          tag_vocab: Vocab | None = None, checkpoint_dir=None, log_fn=None):
    """Train on (tree, labels) pairs and return (best params, TrainReport).

    Each epoch visits the training set in a fresh seed-derived random order;
    the returned parameters come from the epoch with the lowest dev loss
    (earliest epoch on ties). With ``checkpoint_dir`` every epoch writes a
    model file plus a metrics line, and the selected checkpoint is copied to
    ``best.model``.
    """
    config.validate()
    if not train_set:
        raise DataError("training set is empty")
    if not dev_set:
        raise DataError("development set is empty")

    if checkpoint_dir is not None:
        os.makedirs(checkpoint_dir, exist_ok=True)
        metrics_path = os.path.join(checkpoint_dir, "metrics.jsonl")
        with open(metrics_path, "w", encoding="utf-8"):
            pass

    rng = np.random.default_rng(config.seed)
    params = init_params(config.lam, word_vocab, tag_vocab, config.use_tags,
                         config.seed, leaf_tags=config.leaf_tags)
    state = AdamState(params)
    report = TrainReport()
    best: ModelParams | None = None
    best_loss = math.inf

    for epoch in range(1, config.max_epochs + 1):
        t0 = time.monotonic()
        order = rng.permutation(len(train_set))
        loss_sum, n_seen = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start:start + config.batch_size]]
            loss, grads = batch_loss(params, batch)
            adam_step(params, grads, state, config)
            loss_sum += loss * len(batch)
            n_seen += len(batch)
        train_loss = loss_sum / n_seen
        dev_loss = evaluate_loss(params, dev_set)
        seconds = time.monotonic() - t0

        report.train_losses.append(train_loss)
        report.dev_losses.append(dev_loss)
        report.epoch_seconds.append(seconds)
        if dev_loss < best_loss:
            best_loss = dev_loss
            best = params.copy()
            report.selected_epoch = epoch
        if log_fn is not None:
            log_fn(f"epoch {epoch}: train_loss {train_loss:.6f} "
                   f"dev_loss {dev_loss:.6f} ({seconds:.1f}s)")
        if checkpoint_dir is not None:
            params.save(os.path.join(checkpoint_dir, f"epoch-{epoch:03d}.model"))
            with open(metrics_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "epoch": epoch, "train_loss": train_loss,
                    "dev_loss": dev_loss, "seconds": seconds,
                }, sort_keys=True) + "\n")

    if checkpoint_dir is not None:
        chosen = os.path.join(checkpoint_dir, f"epoch-{report.selected_epoch:03d}.model")
        shutil.copyfile(chosen, os.path.join(checkpoint_dir, "best.model"))
    return best, report
