"""Cluster-aware link prediction for undirected and directed graphs."""

from .graph import (Graph, GraphFormatError, LinkSplit, SplitError, load_edge_list,
                    read_edge_list, reconstruction_pairs, split_bidirectional, split_bns,
                    split_undirected)
from .heuristics import heuristic_scores
from .louvain import Partition, louvain_auto_k, modularity
from .metrics import (EvalReport, average_precision, classification_report, evaluate,
                      full_matrix_report, roc_auc)
from .model import (HyperParams, TrainedModel, TrainingDivergence, load_model,
                    predict, probability_matrix, save_model, train)

__all__ = [
    "EvalReport", "Graph", "GraphFormatError", "HyperParams", "LinkSplit", "Partition",
    "SplitError", "TrainedModel", "TrainingDivergence", "average_precision",
    "classification_report", "evaluate", "full_matrix_report", "heuristic_scores",
    "load_edge_list", "load_model", "louvain_auto_k", "modularity", "predict",
    "probability_matrix", "read_edge_list", "reconstruction_pairs", "roc_auc", "save_model",
    "split_bidirectional", "split_bns", "split_undirected", "train",
]
__version__ = "0.1.0"
