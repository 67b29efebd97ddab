"""Dictionary update and atom renormalization.

The unconstrained least-squares update D = X Z^T (Z Z^T + eps I)^-1 is followed
by a compensated rescaling: each atom is divided by its norm and the matching
profile row of Z multiplied by it, which restores the unit-norm constraint
without changing the product D Z.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import DegenerateAtom, DimensionMismatch, SingularGram

DEGENERATE_NORM = 1e-12


def default_ridge(Z: np.ndarray) -> float:
    """Scale-invariant stabilizer 1e-10 * trace(Z Z^T) / K."""
    Z = np.asarray(Z, dtype=np.float64)
    return 1e-10 * float(np.sum(Z * Z)) / Z.shape[0]


def update_dictionary(X: np.ndarray, Z: np.ndarray, ridge_eps: float = 0.0) -> np.ndarray:
    """Least-squares atoms D = X Z^T (Z Z^T + ridge_eps I)^-1.

    With ridge_eps = 0 the Gram matrix Z Z^T must be nonsingular.
    """
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if X.shape[1] != Z.shape[1]:
        raise DimensionMismatch(f"X has {X.shape[1]} samples, Z has {Z.shape[1]}")
    K = Z.shape[0]
    gram = Z @ Z.T + ridge_eps * np.eye(K)
    try:
        factor = cho_factor(gram, lower=True)
    except LinAlgError as exc:
        raise SingularGram(
            "Z Z^T is singular; pass ridge_eps > 0 or reduce the atom count"
        ) from exc
    # gram is symmetric, so solving gram @ D^T = Z X^T gives D = X Z^T gram^-1
    return cho_solve(factor, Z @ X.T).T


def normalize_atoms(D: np.ndarray, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-normalize atom columns, scaling profile rows to keep D Z fixed."""
    D = np.asarray(D, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    if D.shape[1] != Z.shape[0]:
        raise DimensionMismatch(f"D has {D.shape[1]} atoms, Z has {Z.shape[0]} rows")
    norms = np.linalg.norm(D, axis=0)
    small = np.flatnonzero(norms < DEGENERATE_NORM)
    if small.size:
        raise DegenerateAtom(int(small[0]))
    return D / norms[None, :], Z * norms[:, None]
