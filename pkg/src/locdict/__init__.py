"""Locality-regularized discriminative dictionary learning.

A dictionary with unit-norm, class-assigned atoms is learned jointly with a
one-vs-all squared-hinge SVM. An atom-graph Laplacian ties similar atoms to
similar coefficient profiles, and test samples are classified by fusing the
per-class regularized reconstruction residual with the SVM scores.
"""

from .classifier import (
    Decision,
    Projector,
    build_projector,
    classify_batch,
    decide,
    regularized_residuals,
)
from .coder import ActiveSet, active_classes, code_all, code_initial, code_with_svm, quad_hinge
from .dict_update import normalize_atoms, update_dictionary
from .graph import LaplacianBundle, knn_similarity, laplacian, locality_energy
from .ingest import PcaTransform, load_matrix, pca_apply, pca_fit, split_per_class
from .model import (
    CodingMatrix,
    Dictionary,
    FeatureMatrix,
    HyperParams,
    LabeledDataset,
    encode_labels,
    one_vs_all_targets,
    validate_dataset,
)
from .modelio import load_model, save_model
from .svm import SvmModel, fit_binary_squared_hinge, fit_multiclass, svm_scores
from .synth import make_blobs
from .trainer import TrainTrace, TrainedModel, initialize, objective, train

__all__ = [
    "ActiveSet", "CodingMatrix", "Decision", "Dictionary", "FeatureMatrix",
    "HyperParams", "LabeledDataset", "LaplacianBundle", "PcaTransform",
    "Projector", "SvmModel", "TrainTrace", "TrainedModel",
    "active_classes", "build_projector", "classify_batch", "code_all",
    "code_initial", "code_with_svm", "decide", "encode_labels",
    "fit_binary_squared_hinge", "fit_multiclass", "initialize",
    "knn_similarity", "laplacian", "load_matrix", "load_model",
    "locality_energy", "make_blobs", "normalize_atoms", "objective",
    "one_vs_all_targets", "pca_apply", "pca_fit", "quad_hinge",
    "regularized_residuals", "save_model", "split_per_class", "svm_scores",
    "train", "update_dictionary", "validate_dataset",
]

__version__ = "0.1.0"
