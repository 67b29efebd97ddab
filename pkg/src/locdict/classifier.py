"""Test-time coding, per-class regularized residuals, and the fused decision.

A test sample is coded in one matrix multiply, z = P x with
P = (D^T D + eta1 I)^-1 D^T, then scored two ways: the class-wise regularized
reconstruction residual and the learned SVM. The predicted class minimizes
r_c - eta2 * s_c, so a high SVM score lowers the fused cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DimensionMismatch, EmptyInput, SingularSystem
from .model import Dictionary, _freeze
from .svm import SvmModel, svm_scores


@dataclass(frozen=True)
class Projector:
    """Linear coding operator P (K x m) for test samples."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(self.matrix))


@dataclass(frozen=True)
class Decision:
    """Per-class residuals, SVM scores, fused costs, and the argmin class."""

    predicted_class: int
    residuals: np.ndarray
    svm_scores: np.ndarray
    fused: np.ndarray


def build_projector(dictionary: Dictionary, eta1: float) -> Projector:
    """P = (D^T D + eta1 I)^-1 D^T."""
    D = dictionary.atoms
    K = D.shape[1]
    A = D.T @ D + eta1 * np.eye(K)
    try:
        P = cho_solve(cho_factor(A, lower=True), D.T)
    except LinAlgError as exc:
        raise SingularSystem(
            "D^T D singular; a positive eta1 is required when K > m"
        ) from exc
    return Projector(matrix=P)


def regularized_residuals(
    x: np.ndarray, z: np.ndarray, dictionary: Dictionary
) -> np.ndarray:
    """r_c = ||x - D_c z_c||_2 / ||z_c||_2 over the class sub-dictionaries.

    A class whose coefficient block has (near-)zero norm gets r_c = +inf so it
    can never win the residual criterion.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (dictionary.n_atoms,):
        raise DimensionMismatch("coding vector length must equal the atom count")
    C = dictionary.num_classes
    r = np.empty(C)
    for c in range(1, C + 1):
        idx = dictionary.class_atom_indices(c)
        zc = z[idx]
        denom = np.linalg.norm(zc)
        if denom < 1e-12:
            r[c - 1] = np.inf
            continue
        r[c - 1] = np.linalg.norm(x - dictionary.atoms[:, idx] @ zc) / denom
    return r


def decide(
    x: np.ndarray,
    dictionary: Dictionary,
    projector: Projector,
    svm: SvmModel,
    eta2: float,
) -> Decision:
    """Code, score, and fuse one sample; ties go to the lowest class index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (projector.matrix.shape[1],):
        raise DimensionMismatch(
            f"sample has shape {x.shape}, projector expects length {projector.matrix.shape[1]}"
        )
    z = projector.matrix @ x
    r = regularized_residuals(x, z, dictionary)
    s = svm_scores(z, svm)
    fused = r - eta2 * s
    return Decision(
        predicted_class=int(np.argmin(fused)) + 1,
        residuals=r,
        svm_scores=s,
        fused=fused,
    )


def classify_batch(
    X_test: np.ndarray,
    dictionary: Dictionary,
    projector: Projector,
    svm: SvmModel,
    eta2: float,
    labels: np.ndarray | None = None,
) -> tuple[np.ndarray, float | None, np.ndarray | None, list[Decision]]:
    """Classify every column of X_test.

    Returns (predictions, accuracy, confusion, decisions); accuracy and the
    C x C confusion matrix (row = true class, column = predicted) are None
    when no labels are supplied.
    """
    X_test = np.asarray(X_test, dtype=np.float64)
    if X_test.ndim != 2 or X_test.shape[1] == 0:
        raise EmptyInput("test set must contain at least one sample column")
    decisions = [
        decide(X_test[:, i], dictionary, projector, svm, eta2)
        for i in range(X_test.shape[1])
    ]
    preds = np.array([d.predicted_class for d in decisions], dtype=np.int64)
    if labels is None:
        return preds, None, None, decisions
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != preds.shape:
        raise DimensionMismatch("one label per test column is required")
    C = dictionary.num_classes
    confusion = np.zeros((C, C), dtype=np.int64)
    for t, p in zip(labels, preds):
        confusion[t - 1, p - 1] += 1
    accuracy = float(np.trace(confusion)) / len(preds)
    return preds, accuracy, confusion, decisions
