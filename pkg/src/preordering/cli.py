"""Command-line front end: make-labels, train, apply, eval, inspect-model.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Output files are written via a temp file and renamed, so a failing run
never leaves partial output behind.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import evaluation, oracle, reorder, training, trees
from .alignments import read_alignment_file
from .errors import DataError, NumericError
from .model import load_model
from .trees import build_vocab, leaves_in_order, read_tree_file


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _write_lines(path, lines) -> None:
    """Write all lines atomically (temp file + rename)."""
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _read_parallel(tree_path, other_path, what: str):
    with open(tree_path, encoding="utf-8") as fh:
        n_trees = sum(1 for _ in fh)
    with open(other_path, encoding="utf-8") as fh:
        n_other = sum(1 for _ in fh)
    if n_trees != n_other:
        raise DataError(
            f"line counts differ: {tree_path} has {n_trees} trees but "
            f"{other_path} has {n_other} {what} lines")


def cmd_make_labels(args) -> int:
    _read_parallel(args.trees, args.align, "alignment")
    tree_list = read_tree_file(args.trees, auto_binarize=args.binarize)
    alignments = read_alignment_file(
        args.align, [t.n_leaves for t in tree_list], first_link=args.first_link)

    lines = []
    before, after, n_degenerate = [], [], 0
    for i, (tree, alignment) in enumerate(zip(tree_list, alignments)):
        labels = oracle.gold_labels(tree, alignment)
        lines.append(oracle.labels_to_line(tree, labels))
        y = [t for t in alignment.links if t is not None]
        if len(y) < 2:
            n_degenerate += 1
            print(f"{i}\tna\tna")
            continue
        tau_before = oracle.kendall_tau(y)
        tau_after = oracle.oracle_permutation_tau(tree, alignment, labels)
        before.append(tau_before)
        after.append(tau_after)
        print(f"{i}\t{tau_before:.6f}\t{tau_after:.6f}")

    _write_lines(args.out, lines)
    scored = len(before)
    mean_b = sum(before) / scored if scored else float("nan")
    mean_a = sum(after) / scored if scored else float("nan")
    print(f"labeled {len(tree_list)} sentences ({n_degenerate} with <2 aligned "
          f"tokens); mean tau {mean_b:.4f} -> {mean_a:.4f} with oracle labels",
          file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    config = training.TrainConfig(
        batch_size=args.batch_size, max_epochs=args.epochs, lam=args.dim,
        learning_rate=args.lr, adam_beta1=args.beta1, adam_beta2=args.beta2,
        adam_eps=args.eps, weight_decay=args.weight_decay,
        clip_norm=args.clip_norm, seed=args.seed, use_tags=args.use_tags,
        leaf_tags=args.leaf_tags == "on", decoupled_decay=args.decoupled_decay)
    try:
        config.validate()
    except ValueError as e:
        print(f"{args.prog}: error: {e}", file=sys.stderr)
        return 1

    _read_parallel(args.trees, args.labels, "label")
    _read_parallel(args.dev_trees, args.dev_labels, "label")
    train_trees = read_tree_file(args.trees, auto_binarize=args.binarize)
    train_labels = oracle.read_labels_file(args.labels, train_trees)
    dev_trees = read_tree_file(args.dev_trees, auto_binarize=args.binarize)
    dev_labels = oracle.read_labels_file(args.dev_labels, dev_trees)

    word_vocab = build_vocab((leaves_in_order(t) for t in train_trees),
                             args.vocab_size)
    tag_vocab = build_vocab(([n.tag for n in t.nodes] for t in train_trees),
                            args.tag_vocab_size)

    _, report = training.train(
        list(zip(train_trees, train_labels)), list(zip(dev_trees, dev_labels)),
        config, word_vocab, tag_vocab, checkpoint_dir=args.out,
        log_fn=lambda msg: print(msg, file=sys.stderr))
    print(f"selected epoch {report.selected_epoch} "
          f"(dev loss {report.dev_losses[report.selected_epoch - 1]:.6f}); "
          f"wrote {os.path.join(args.out, 'best.model')}", file=sys.stderr)
    return 0


def cmd_apply(args) -> int:
    params = load_model(args.model)
    tree_list = read_tree_file(args.trees, auto_binarize=args.binarize)

    sentences, perm_lines, label_lines = [], [], []
    for tree in tree_list:
        tokens, perm, labels = reorder.predict_and_apply(params, tree)
        sentences.append(" ".join(tokens))
        perm_lines.append(" ".join(str(p) for p in perm.mapping))
        label_lines.append(oracle.labels_to_line(tree, labels))

    _write_lines(args.out, sentences)
    if args.perm_out:
        _write_lines(args.perm_out, perm_lines)
    if args.labels_out:
        _write_lines(args.labels_out, label_lines)
    return 0


def cmd_eval(args) -> int:
    if bool(args.pred_labels) != bool(args.gold_labels):
        raise DataError("--pred-labels and --gold-labels must be given together")
    _read_parallel(args.trees, args.align, "alignment")
    tree_list = read_tree_file(args.trees, auto_binarize=args.binarize)
    alignments = read_alignment_file(
        args.align, [t.n_leaves for t in tree_list], first_link=args.first_link)

    dist = evaluation.tau_distribution(tree_list, alignments)
    print(json.dumps({"kind": "tau_distribution", "which": "baseline",
                      **dist.to_record()}, sort_keys=True))
    if args.chart:
        print("baseline tau distribution:\n" + dist.chart(), file=sys.stderr)

    if args.perm:
        perms = reorder.read_permutation_file(args.perm, tree_list)
        pdist = evaluation.tau_distribution(tree_list, alignments, perms)
        print(json.dumps({"kind": "tau_distribution", "which": "preordered",
                          **pdist.to_record()}, sort_keys=True))
        if args.chart:
            print("preordered tau distribution:\n" + pdist.chart(), file=sys.stderr)

    if args.pred_labels:
        pred = oracle.read_labels_file(args.pred_labels, tree_list)
        gold = oracle.read_labels_file(args.gold_labels, tree_list)
        acc = evaluation.label_accuracy(pred, gold)
        print(json.dumps({"kind": "label_accuracy", **acc.to_record()},
                         sort_keys=True))
    return 0


def cmd_inspect_model(args) -> int:
    params = load_model(args.model)
    print(f"model version 1, lambda {params.lam}, "
          f"use_tags {params.use_tags}, leaf_tags {params.leaf_tags}")
    print(f"word vocab: {len(params.word_vocab)} entries; "
          f"tag vocab: {len(params.tag_vocab)} entries")
    for name, t in params.named_parameters():
        print(f"  {name:4s} {t.rows} x {t.cols}")
    print(f"total parameters: {params.n_params()}")
    return 0


def _add_binarize(p) -> None:
    p.add_argument("--binarize", action="store_true",
                   help="right-binarize input trees with more than 2 children")


def build_parser() -> _Parser:
    parser = _Parser(prog="preorder",
                     description="Tree-based preordering for machine translation")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("make-labels",
                       help="derive gold Straight/Inverted labels from alignments")
    p.add_argument("--trees", required=True, help="bracketed trees, one per line")
    p.add_argument("--align", required=True, help="Pharaoh alignments, line-parallel")
    p.add_argument("--out", required=True, help="output label file")
    p.add_argument("--first-link", action="store_true",
                   help="keep the smallest target for multiply-linked source tokens")
    _add_binarize(p)
    p.set_defaults(func=cmd_make_labels)

    p = sub.add_parser("train", help="train a preordering model")
    p.add_argument("--trees", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--dev-trees", required=True)
    p.add_argument("--dev-labels", required=True)
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.add_argument("--batch-size", type=int, default=500, metavar="K")
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--dim", type=int, default=200, help="hidden width lambda")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--beta1", type=float, default=0.9)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--weight-decay", type=float, default=1e-4)
    p.add_argument("--clip-norm", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--use-tags", action="store_true",
                   help="compose with POS tag / category embeddings")
    p.add_argument("--leaf-tags", choices=("on", "off"), default="on",
                   help="feed the leaf's tag embedding into the leaf transform "
                        "(tag models only)")
    p.add_argument("--decoupled-decay", action="store_true",
                   help="apply weight decay directly to weights instead of "
                        "adding it to gradients")
    p.add_argument("--vocab-size", type=int, default=50000)
    p.add_argument("--tag-vocab-size", type=int, default=50000)
    _add_binarize(p)
    p.set_defaults(func=cmd_train, prog="preorder train")

    p = sub.add_parser("apply", help="reorder sentences with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--trees", required=True)
    p.add_argument("--out", required=True, help="reordered sentences")
    p.add_argument("--perm-out", help="optional permutation sidecar")
    p.add_argument("--labels-out", help="optional predicted-label sidecar")
    _add_binarize(p)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("eval", help="tau distributions and label accuracy")
    p.add_argument("--trees", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--perm", help="permutation file from apply --perm-out")
    p.add_argument("--pred-labels")
    p.add_argument("--gold-labels")
    p.add_argument("--first-link", action="store_true")
    p.add_argument("--chart", action="store_true",
                   help="print bar charts to stderr")
    _add_binarize(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("inspect-model", help="print model metadata")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_inspect_model)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"preorder: data error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"preorder: numeric failure: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"preorder: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
