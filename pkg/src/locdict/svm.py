"""One-vs-all linear SVM with squared hinge loss, solved in the primal.

The per-class objective ||u||^2 + theta * sum_i max(0, 1 - y_i(u^T z_i + b))^2
is piecewise quadratic, so an active-set Newton scheme solves it exactly:
alternate between identifying the margin-violating samples and solving the
least-squares problem restricted to them, until the set stops changing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ClassOutOfRange, DimensionMismatch
from .model import _freeze, one_vs_all_targets

MAX_ACTIVE_SET_ROUNDS = 100


@dataclass(frozen=True)
class SvmModel:
    """Hyperplane normals (K x C, one column per class) and biases (length C)."""

    normals: np.ndarray
    biases: np.ndarray
    converged: bool = True

    def __post_init__(self):
        normals = np.asarray(self.normals, dtype=np.float64)
        biases = np.asarray(self.biases, dtype=np.float64)
        if normals.ndim != 2 or biases.shape != (normals.shape[1],):
            raise DimensionMismatch("normals must be K x C with one bias per class")
        if not (np.all(np.isfinite(normals)) and np.all(np.isfinite(biases))):
            raise DimensionMismatch("SVM parameters must be finite")
        object.__setattr__(self, "normals", _freeze(normals))
        object.__setattr__(self, "biases", _freeze(biases))

    @property
    def num_classes(self) -> int:
        return self.normals.shape[1]

    @classmethod
    def zeros(cls, n_atoms: int, num_classes: int) -> "SvmModel":
        return cls(np.zeros((n_atoms, num_classes)), np.zeros(num_classes))


def squared_hinge_objective(
    Z: np.ndarray, targets: np.ndarray, u: np.ndarray, b: float, theta: float
) -> float:
    """||u||^2 + theta * total squared hinge loss over all samples."""
    margins = targets * (Z.T @ u + b)
    viol = np.maximum(0.0, 1.0 - margins)
    return float(u @ u + theta * np.sum(viol**2))


def fit_binary_squared_hinge(
    Z: np.ndarray, targets: np.ndarray, theta: float
) -> tuple[np.ndarray, float, bool]:
    """Minimize ||u||^2 + theta sum_i max(0, 1 - y_i(u^T z_i + b))^2.

    Returns (u, b, converged). ``converged`` is False only if the active set
    still oscillates after the round cap; the best iterate seen is returned.
    The bias is unregularized and fixed to 0 when no sample is active.
    """
    Z = np.asarray(Z, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if Z.ndim != 2 or y.shape != (Z.shape[1],):
        raise DimensionMismatch("Z must be K x n with one target per sample")
    if not theta > 0:
        raise ValueError("theta must be positive")
    K, n = Z.shape

    u = np.zeros(K)
    b = 0.0
    grad_tol = 1e-10 * (1.0 + theta * n)
    best = (_objective_and_grad(Z, y, u, b, theta)[0], u, b)
    seen: set[frozenset[int]] = set()
    converged = False
    for _ in range(MAX_ACTIVE_SET_ROUNDS):
        obj, grad_norm, active = _objective_and_grad(Z, y, u, b, theta)
        if obj < best[0]:
            best = (obj, u, b)
        if grad_norm <= grad_tol:
            converged = True
            break
        if active.size == 0:
            # zero-loss region but u != 0 is not stationary; restart at the
            # origin (its active set is all samples)
            u, b = np.zeros(K), 0.0
            continue
        key = frozenset(active.tolist())
        if key in seen:
            break  # active set revisited without reaching KKT: oscillation
        seen.add(key)
        u, b = _restricted_solve(Z[:, active], y[active], theta)

    obj, grad_norm, _ = _objective_and_grad(Z, y, u, b, theta)
    if obj < best[0]:
        best = (obj, u, b)
    if not converged:
        converged = grad_norm <= grad_tol
    _, u, b = best
    return u, float(b), converged


def _objective_and_grad(Z, y, u, b, theta):
    """Objective value, gradient norm, and active-sample indices at (u, b)."""
    margins = y * (Z.T @ u + b)
    viol = np.maximum(0.0, 1.0 - margins)
    active = np.flatnonzero(margins < 1.0)
    obj = float(u @ u + theta * np.sum(viol**2))
    coeff = viol * y  # zero for inactive samples
    g_u = 2.0 * u - 2.0 * theta * (Z @ coeff)
    g_b = -2.0 * theta * float(np.sum(coeff))
    grad_norm = float(np.sqrt(g_u @ g_u + g_b * g_b))
    return obj, grad_norm, active


def _restricted_solve(Za: np.ndarray, ya: np.ndarray, theta: float) -> tuple[np.ndarray, float]:
    """Exact minimizer of ||u||^2 + theta sum_{i in A} (y_i - u^T z_i - b)^2.

    Normal equations in w = [u; b] with features a_i = [z_i; 1]; the identity
    block regularizes u only, and theta * |A| > 0 keeps the b block positive
    definite, so the system is SPD whenever A is nonempty.
    """
    K = Za.shape[0]
    A = np.vstack([Za, np.ones((1, Za.shape[1]))])  # (K+1) x |A|
    R = np.eye(K + 1)
    R[K, K] = 0.0
    lhs = R + theta * (A @ A.T)
    rhs = theta * (A @ ya)
    w = cho_solve(cho_factor(lhs, lower=True), rhs)
    return w[:K], float(w[K])


def fit_multiclass(
    Z: np.ndarray, labels: np.ndarray, theta: float
) -> SvmModel:
    """One independent binary fit per class against its one-vs-all targets."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ClassOutOfRange("empty label vector")
    C = int(labels.max())
    K = np.asarray(Z).shape[0]
    normals = np.zeros((K, C))
    biases = np.zeros(C)
    all_converged = True
    for c in range(1, C + 1):
        try:
            u, b, ok = fit_binary_squared_hinge(Z, one_vs_all_targets(labels, c), theta)
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"class {c}: {exc}") from exc
        normals[:, c - 1] = u
        biases[c - 1] = b
        all_converged = all_converged and ok
    return SvmModel(normals=normals, biases=biases, converged=all_converged)


def svm_scores(z: np.ndarray, model: SvmModel) -> np.ndarray:
    """Per-class decision values u_c^T z + b_c."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (model.normals.shape[0],):
        raise DimensionMismatch(
            f"z has shape {z.shape}, model expects length {model.normals.shape[0]}"
        )
    return model.normals.T @ z + model.biases
