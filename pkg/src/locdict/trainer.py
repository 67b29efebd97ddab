"""Alternating optimization: Laplacian -> codes -> dictionary -> SVM.

Each sweep rebuilds the atom graph from the current dictionary, re-solves every
coding column, refits the dictionary by least squares (with compensated atom
renormalization), and refits the one-vs-all SVM. The full objective

    ||X - D Z||_F^2 + lambda1 tr(Z^T L Z)
      + 2 lambda2 sum_c [ ||u_c||^2 + theta sum_i hinge(z_i, y_i^c, u_c, b_c)^2 ]

is recorded after every sweep; training stops at max_iters or when its relative
change drops below 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classifier, coder, dict_update, graph, svm as svm_mod
from .errors import DegenerateAtom
from .model import (
    CodingMatrix,
    Dictionary,
    HyperParams,
    LabeledDataset,
    validate_dataset,
)

REL_OBJECTIVE_TOL = 1e-5


@dataclass(frozen=True)
class TrainedModel:
    """Everything needed for inference: dictionary, SVM, projector, label names."""

    dictionary: Dictionary
    svm: svm_mod.SvmModel
    params: HyperParams
    projector: classifier.Projector
    label_names: list[str]

    def classify(self, x: np.ndarray, eta2: float | None = None) -> classifier.Decision:
        eta2 = self.params.eta2 if eta2 is None else eta2
        return classifier.decide(x, self.dictionary, self.projector, self.svm, eta2)

    def classify_batch(self, X_test, labels=None, eta2: float | None = None):
        eta2 = self.params.eta2 if eta2 is None else eta2
        return classifier.classify_batch(
            X_test, self.dictionary, self.projector, self.svm, eta2, labels
        )


@dataclass
class TrainTrace:
    """Per-sweep diagnostics."""

    objective_per_iter: list[float] = field(default_factory=list)
    active_set_sizes: list[int] = field(default_factory=list)
    atom_reinit_events: list[tuple[int, int]] = field(default_factory=list)


def initialize(
    ds: LabeledDataset, params: HyperParams, seed: int
) -> tuple[Dictionary, CodingMatrix, svm_mod.SvmModel]:
    """Seeded initialization: class-sampled unit atoms, ridge least-squares codes.

    Atoms for class c are atoms_per_class samples drawn uniformly from that
    class (with replacement only when the class is smaller than requested).
    The initial Z uses the plain least-squares path (no locality term yet,
    because the graph depends on the atoms); U and b start at zero.
    """
    validate_dataset(ds)
    rng = np.random.default_rng(seed)
    X = ds.features.values
    cols = []
    atom_labels = []
    for c in range(1, ds.num_classes + 1):
        pool = np.flatnonzero(ds.labels == c)
        replace = pool.size < params.atoms_per_class
        chosen = rng.choice(pool, size=params.atoms_per_class, replace=replace)
        for j in chosen:
            v = X[:, j]
            norm = np.linalg.norm(v)
            if norm < dict_update.DEGENERATE_NORM:
                v = rng.standard_normal(X.shape[0])
                norm = np.linalg.norm(v)
            cols.append(v / norm)
            atom_labels.append(c)
    dictionary = Dictionary(np.column_stack(cols), np.array(atom_labels))
    K = dictionary.n_atoms
    Z = coder.code_all(
        dictionary, np.zeros((K, K)), X, params, svm_mod.SvmModel.zeros(K, ds.num_classes),
        ds.labels, iteration=1, Z_prev=None,
    )
    return dictionary, Z, svm_mod.SvmModel.zeros(K, ds.num_classes)


def objective(
    X: np.ndarray,
    D: np.ndarray,
    Z: np.ndarray,
    L: np.ndarray,
    model: svm_mod.SvmModel,
    labels: np.ndarray,
    params: HyperParams,
) -> float:
    """Full training objective (reconstruction + locality + SVM terms)."""
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    recon = float(np.sum((X - D @ Z) ** 2))
    loc = params.lambda1 * graph.locality_energy(Z, L)
    discr = 0.0
    margins = model.normals.T @ Z + model.biases[:, None]  # C x n
    for c in range(1, model.num_classes + 1):
        y = np.where(np.asarray(labels) == c, 1.0, -1.0)
        viol = np.maximum(0.0, 1.0 - y * margins[c - 1])
        discr += float(model.normals[:, c - 1] @ model.normals[:, c - 1])
        discr += params.theta * float(np.sum(viol**2))
    return recon + loc + 2.0 * params.lambda2 * discr


def _reinit_degenerate_atoms(
    D: np.ndarray,
    atom_labels: np.ndarray,
    X: np.ndarray,
    Z: np.ndarray,
    labels: np.ndarray,
) -> list[int]:
    """Replace collapsed atoms in place with the worst-reconstructed class sample."""
    norms = np.linalg.norm(D, axis=0)
    bad = np.flatnonzero(norms < dict_update.DEGENERATE_NORM)
    if bad.size == 0:
        return []
    residual = np.sum((X - D @ Z) ** 2, axis=0)
    for k in bad:
        pool = np.flatnonzero(np.asarray(labels) == atom_labels[k])
        pick = pool[np.argmax(residual[pool])]
        v = X[:, pick]
        norm = np.linalg.norm(v)
        D[:, k] = v / norm if norm >= dict_update.DEGENERATE_NORM else 0.0
        if norm < dict_update.DEGENERATE_NORM:
            raise DegenerateAtom(int(k))
    return [int(k) for k in bad]


def train(ds: LabeledDataset, params: HyperParams) -> tuple[TrainedModel, TrainTrace]:
    """Run the full alternating loop on a validated dataset."""
    validate_dataset(ds)
    X = ds.features.values
    dictionary, Z, model = initialize(ds, params, params.seed)
    trace = TrainTrace()
    prev_obj = None
    for t in range(1, params.max_iters + 1):
        delta = params.delta if params.delta is not None else graph.mean_pairwise_distance(
            dictionary.atoms
        )
        bundle = graph.laplacian(graph.knn_similarity(dictionary, params.knn_k, delta))
        L = bundle.laplacian

        Z = coder.code_all(
            dictionary, L, X, params, model, ds.labels,
            iteration=t, Z_prev=Z.values,
        )
        trace.active_set_sizes.append(_count_active(Z.values, ds.labels, model, t))

        ridge = params.ridge_eps
        if ridge is None:
            ridge = dict_update.default_ridge(Z.values)
        D_new = dict_update.update_dictionary(X, Z.values, ridge)
        reinits = _reinit_degenerate_atoms(
            D_new, dictionary.atom_labels, X, Z.values, ds.labels
        )
        trace.atom_reinit_events.extend((t, k) for k in reinits)
        D_norm, Z_scaled = dict_update.normalize_atoms(D_new, Z.values)
        dictionary = Dictionary(D_norm, dictionary.atom_labels)
        Z = CodingMatrix(Z_scaled)

        model = svm_mod.fit_multiclass(Z.values, ds.labels, params.theta)

        obj = objective(X, dictionary.atoms, Z.values, L, model, ds.labels, params)
        trace.objective_per_iter.append(obj)
        if prev_obj is not None:
            denom = max(abs(prev_obj), 1e-30)
            if abs(prev_obj - obj) / denom < REL_OBJECTIVE_TOL:
                break
        prev_obj = obj

    projector = classifier.build_projector(dictionary, params.eta1)
    trained = TrainedModel(
        dictionary=dictionary,
        svm=model,
        params=params,
        projector=projector,
        label_names=[str(c) for c in range(1, ds.num_classes + 1)],
    )
    return trained, trace


def _count_active(Z: np.ndarray, labels: np.ndarray, model: svm_mod.SvmModel, t: int) -> int:
    if t <= 1:
        return 0
    total = 0
    for i in range(Z.shape[1]):
        y = np.where(
            np.arange(1, model.num_classes + 1) == labels[i], 1.0, -1.0
        )
        total += len(coder.active_classes(Z[:, i], y, model))
    return total
