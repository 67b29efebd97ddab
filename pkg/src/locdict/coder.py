"""Per-sample coding solves.

Each coding vector minimizes a strictly convex quadratic: reconstruction plus
the atom-graph locality penalty, and from the second sweep onward a squared
hinge term over the classes whose SVM margin the sample currently violates.
Both cases reduce to one symmetric positive-definite linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DimensionMismatch, SingularSystem
from .model import CodingMatrix, Dictionary, HyperParams
from .svm import SvmModel


@dataclass(frozen=True)
class ActiveSet:
    """Classes whose margin constraint a sample currently violates."""

    classes: frozenset[int] = field(default_factory=frozenset)

    def __iter__(self):
        return iter(sorted(self.classes))

    def __len__(self):
        return len(self.classes)


def _solve_spd(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve; one ridge retry for numerically singular PSD systems."""
    try:
        return cho_solve(cho_factor(A, lower=True), rhs)
    except LinAlgError:
        ridge = 1e-10 * np.trace(A) / A.shape[0]
        try:
            return cho_solve(cho_factor(A + ridge * np.eye(A.shape[0]), lower=True), rhs)
        except LinAlgError as exc:
            raise SingularSystem("coding system singular even after ridge retry") from exc


def quad_hinge(z: np.ndarray, y: float, u: np.ndarray, b: float) -> float:
    """Squared hinge max(0, 1 - y(u^T z + b))^2."""
    z = np.asarray(z, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if z.shape != u.shape:
        raise DimensionMismatch(f"z has shape {z.shape}, u has shape {u.shape}")
    margin = y * (float(u @ z) + b)
    return max(0.0, 1.0 - margin) ** 2


def active_classes(z: np.ndarray, targets: np.ndarray, svm: SvmModel) -> ActiveSet:
    """Margin-violating classes: those with y^c (u_c^T z + b_c) < 1."""
    z = np.asarray(z, dtype=np.float64)
    if svm.normals.shape[0] != z.shape[0]:
        raise DimensionMismatch(
            f"z has {z.shape[0]} entries but SVM normals have {svm.normals.shape[0]} rows"
        )
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape[0] != svm.num_classes:
        raise DimensionMismatch("need one +/-1 target per class")
    margins = targets * (svm.normals.T @ z + svm.biases)
    return ActiveSet(frozenset(int(c) + 1 for c in np.flatnonzero(margins < 1.0)))


def code_initial(
    dictionary: Dictionary, L: np.ndarray, x: np.ndarray, lambda1: float
) -> np.ndarray:
    """Locality-regularized least-squares code: (D^T D + lambda1 L)^-1 D^T x."""
    D = dictionary.atoms
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (D.shape[0],):
        raise DimensionMismatch(f"sample has shape {x.shape}, atoms have {D.shape[0]} rows")
    A = D.T @ D
    if lambda1 != 0.0:
        A = A + lambda1 * np.asarray(L, dtype=np.float64)
    return _solve_spd(A, D.T @ x)


def code_with_svm(
    dictionary: Dictionary,
    L: np.ndarray,
    x: np.ndarray,
    params: HyperParams,
    svm: SvmModel,
    targets: np.ndarray,
    phi: ActiveSet,
) -> np.ndarray:
    """Coding solve with the squared-hinge term restricted to the active classes.

    Solves A z = rhs with
        A   = D^T D + lambda1 L + 2 lambda2 theta * sum_{c in phi} u_c u_c^T
        rhs = D^T x + 2 lambda2 theta * sum_{c in phi} u_c (y^c - b_c)
    The active set is taken as given (frozen from the previous sweep).
    """
    D = dictionary.atoms
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (D.shape[0],):
        raise DimensionMismatch(f"sample has shape {x.shape}, atoms have {D.shape[0]} rows")
    A = D.T @ D
    if params.lambda1 != 0.0:
        A = A + params.lambda1 * np.asarray(L, dtype=np.float64)
    rhs = D.T @ x
    w = 2.0 * params.lambda2 * params.theta
    if w != 0.0 and len(phi) > 0:
        idx = np.array(sorted(phi.classes)) - 1
        U = svm.normals[:, idx]
        A = A + w * (U @ U.T)
        rhs = rhs + w * (U @ (np.asarray(targets)[idx] - svm.biases[idx]))
    return _solve_spd(A, rhs)


def code_all(
    dictionary: Dictionary,
    L: np.ndarray,
    X: np.ndarray,
    params: HyperParams,
    svm: SvmModel,
    labels: np.ndarray,
    iteration: int,
    Z_prev: np.ndarray | None,
) -> CodingMatrix:
    """Solve every column of Z for one sweep.

    The first sweep (iteration 1) disables the hinge entirely; later sweeps
    evaluate each column's active set against the previous iterate ``Z_prev``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[1]
    K = dictionary.n_atoms
    Z = np.empty((K, n))
    if iteration <= 1:
        for i in range(n):
            Z[:, i] = _wrap_column(code_initial, i)(dictionary, L, X[:, i], params.lambda1)
        return CodingMatrix(Z)
    if Z_prev is None:
        raise DimensionMismatch("Z_prev is required from the second sweep onward")
    Z_prev = np.asarray(Z_prev, dtype=np.float64)
    if Z_prev.shape != (K, n):
        raise DimensionMismatch(f"Z_prev has shape {Z_prev.shape}, expected {(K, n)}")
    C = svm.num_classes
    target_rows = np.where(
        np.arange(1, C + 1)[:, None] == np.asarray(labels)[None, :], 1.0, -1.0
    )  # C x n
    for i in range(n):
        targets = target_rows[:, i]
        phi = active_classes(Z_prev[:, i], targets, svm)
        Z[:, i] = _wrap_column(code_with_svm, i)(
            dictionary, L, X[:, i], params, svm, targets, phi
        )
    return CodingMatrix(Z)


def _wrap_column(fn, i):
    def run(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SingularSystem as exc:
            raise SingularSystem(f"column {i}: {exc}") from exc

    return run
