"""Tree-based preordering for machine translation.

Derives Straight/Inverted node labels from word alignments via rank
correlation, trains a recursive network over binary syntax trees to predict
them, and reorders source sentences into target-like word order.
"""

from .alignments import Alignment, parse_alignment, target_indices
from .errors import (AlignmentError, DataError, ModelFormatError,
                     NumericError, PreorderingError, TreeParseError)
from .model import (ModelParams, NodePrediction, batch_loss, compose,
                    forward, init_params, leaf_vector, load_model, save_model)
from .oracle import (Label, gold_label, gold_labels, kendall_tau,
                     oracle_permutation_tau)
from .reorder import Permutation, apply_labels, predict_and_apply
from .trees import (SyntaxTree, Vocab, binarize, build_vocab, leaves_in_order,
                    parse_raw, parse_tree, serialize)
from .training import TrainConfig, TrainReport, adam_step, evaluate_loss, train

__version__ = "0.1.0"

__all__ = [
    "Alignment", "AlignmentError", "DataError", "Label", "ModelFormatError",
    "ModelParams", "NodePrediction", "NumericError", "Permutation",
    "PreorderingError", "SyntaxTree", "TrainConfig", "TrainReport",
    "TreeParseError", "Vocab", "adam_step", "apply_labels", "batch_loss",
    "binarize", "build_vocab", "compose", "evaluate_loss", "forward",
    "gold_label", "gold_labels", "init_params", "kendall_tau", "leaf_vector",
    "leaves_in_order", "load_model", "oracle_permutation_tau",
    "parse_alignment", "parse_raw", "parse_tree", "predict_and_apply",
    "save_model", "serialize", "target_indices", "train",
]
