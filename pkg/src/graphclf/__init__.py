"""Synthetic graph classification with small GNNs written on numpy.

The package generates labelled random graphs (Erdős–Rényi, Watts–Strogatz,
Barabási–Albert and lattices, each at two densities), computes network
statistics and structural node features, and trains GIN, GATv2 and
SAGPool-based classifiers with a small tape-based autodiff engine.
"""
from .graph import ClassLabel, Graph, GraphError, NUM_CLASSES, from_edge_list
from .generators import DatasetSpec, LabeledDataset, build_dataset
from .features import Degree, FeatureKind, Identity, Noise, NormDegree, Ones, augment
from .models import ARCHITECTURES, ModelConfig, build, load_checkpoint, save_checkpoint
from .training import FeatureSet, RunResult, TrainConfig, evaluate, train, train_once

__version__ = "0.1.0"

__all__ = [
    "ARCHITECTURES", "ClassLabel", "DatasetSpec", "Degree", "FeatureKind", "FeatureSet",
    "Graph", "GraphError", "Identity", "LabeledDataset", "ModelConfig", "NUM_CLASSES",
    "Noise", "NormDegree", "Ones", "RunResult", "TrainConfig", "augment", "build",
    "build_dataset", "evaluate", "from_edge_list", "load_checkpoint", "save_checkpoint",
    "train", "train_once",
]
