"""kNN heat-kernel similarity and graph Laplacian over dictionary atoms.

The locality regularizer penalizes tr(Z^T L Z), which equals the pairwise sum
(1/2) sum_ij M_ij ||zhat_i - zhat_j||^2 over atom profiles, so atoms that are
close in feature space are pushed toward similar usage profiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetricInput,
    DimensionMismatch,
    KTooLarge,
    NegativeSimilarity,
    NonPositiveDelta,
)
from .model import Dictionary, _freeze


@dataclass(frozen=True)
class LaplacianBundle:
    """Similarity M, degree T = diag(row sums of M), and Laplacian L = T - M."""

    similarity: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "similarity", _freeze(self.similarity))
        object.__setattr__(self, "degree", _freeze(self.degree))
        object.__setattr__(self, "laplacian", _freeze(self.laplacian))

    @property
    def n_atoms(self) -> int:
        return self.laplacian.shape[0]


def atom_distances(atoms: np.ndarray) -> np.ndarray:
    """Exact K x K Euclidean distance matrix between atom columns."""
    g = atoms.T @ atoms
    sq = np.diag(g)[:, None] + np.diag(g)[None, :] - 2.0 * g
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def mean_pairwise_distance(atoms: np.ndarray) -> float:
    """Mean off-diagonal atom distance; the adaptive heat-kernel bandwidth."""
    d = atom_distances(atoms)
    k = d.shape[0]
    if k < 2:
        return 1.0
    total = d.sum() / (k * (k - 1))
    return float(total) if total > 0 else 1.0


def knn_similarity(dictionary: Dictionary, knn_k: int, delta: float) -> np.ndarray:
    """Symmetrized kNN heat-kernel similarity between atoms.

    Raw entry exp(-||d_i - d_j||_2 / delta) when atom j is among the knn_k
    nearest atoms of atom i (self excluded, distance ties broken by lower
    index); the result is (M + M^T)/2 with a zero diagonal.
    """
    K = dictionary.n_atoms
    if not delta > 0:
        raise NonPositiveDelta(f"delta must be positive, got {delta!r}")
    if knn_k > K - 1:
        raise KTooLarge(f"knn_k={knn_k} but only {K - 1} other atoms exist")

    dist = atom_distances(dictionary.atoms)
    raw = np.zeros((K, K))
    for i in range(K):
        order = np.argsort(dist[i], kind="stable")  # index breaks distance ties
        neighbors = [j for j in order if j != i][:knn_k]
        raw[i, neighbors] = np.exp(-dist[i, neighbors] / delta)
    sym = 0.5 * (raw + raw.T)
    np.fill_diagonal(sym, 0.0)
    return sym


def laplacian(similarity: np.ndarray) -> LaplacianBundle:
    """Build the degree matrix and Laplacian from a symmetric similarity."""
    m = np.asarray(similarity, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("similarity must be square")
    if not np.array_equal(m, m.T):
        raise AsymmetricInput("similarity matrix is not symmetric")
    if np.any(m < 0):
        raise NegativeSimilarity("similarity entries must be nonnegative")
    if np.any(np.diag(m) != 0):
        raise NegativeSimilarity("similarity diagonal must be zero")
    degree = np.diag(m.sum(axis=1))
    return LaplacianBundle(similarity=m, degree=degree, laplacian=degree - m)


def locality_energy(Z: np.ndarray, L: np.ndarray) -> float:
    """tr(Z^T L Z), the profile-smoothness energy of the atom graph."""
    Z = np.asarray(Z, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if L.shape[0] != L.shape[1] or Z.shape[0] != L.shape[0]:
        raise DimensionMismatch(
            f"Z is {Z.shape}, L is {L.shape}; need L square with K = Z rows"
        )
    return float(np.einsum("ki,kl,li->", Z, L, Z))
