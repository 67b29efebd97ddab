"""Core domain types and label utilities.

Orientation convention used everywhere in this package: samples are columns.
A feature matrix is m x n (feature dimension by sample count), a dictionary is
m x K (one unit-norm atom per column), and a coding matrix is K x n (column i
codes sample i, row j is the usage profile of atom j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassOutOfRange,
    EmptyClass,
    LengthMismatch,
    NonFiniteEntry,
)

ATOM_NORM_TOL = 1e-10


def _freeze(a: np.ndarray) -> np.ndarray:
    """Return a float64 C-contiguous read-only copy (shared safely across workers)."""
    out = np.ascontiguousarray(a, dtype=np.float64).copy()
    out.flags.writeable = False
    return out


def _freeze_int(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.int64).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense m x n data matrix, samples as columns."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise LengthMismatch("feature matrix must be 2-D with at least one row and column")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus dense integer labels in 1..num_classes."""

    features: FeatureMatrix
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "labels", _freeze_int(np.asarray(self.labels)))

    @property
    def n_samples(self) -> int:
        return self.features.n_samples


@dataclass(frozen=True)
class Dictionary:
    """Atom matrix with unit-norm columns and a fixed atom-to-class assignment.

    Atoms are grouped by class: ``atom_labels`` is non-decreasing and every
    class owns at least one atom.
    """

    atoms: np.ndarray
    atom_labels: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        labels = np.asarray(self.atom_labels, dtype=np.int64)
        if atoms.ndim != 2:
            raise LengthMismatch("atom matrix must be 2-D")
        if labels.shape != (atoms.shape[1],):
            raise LengthMismatch("atom_labels length must equal the number of atoms")
        norms = np.linalg.norm(atoms, axis=0)
        if np.any(np.abs(norms - 1.0) > ATOM_NORM_TOL):
            k = int(np.argmax(np.abs(norms - 1.0)))
            raise LengthMismatch(f"atom {k} is not unit-norm (norm={norms[k]!r})")
        if np.any(np.diff(labels) < 0):
            raise LengthMismatch("atom_labels must be non-decreasing (atoms grouped by class)")
        present = set(labels.tolist())
        for c in range(1, (int(labels.max()) if labels.size else 0) + 1):
            if c not in present:
                raise EmptyClass(c)
        object.__setattr__(self, "atoms", _freeze(atoms))
        object.__setattr__(self, "atom_labels", _freeze_int(labels))

    @property
    def n_atoms(self) -> int:
        return self.atoms.shape[1]

    @property
    def dim(self) -> int:
        return self.atoms.shape[0]

    @property
    def num_classes(self) -> int:
        return int(self.atom_labels.max())

    def class_atom_indices(self, c: int) -> np.ndarray:
        """Indices of the atoms owned by class ``c`` (the class sub-dictionary)."""
        return np.flatnonzero(self.atom_labels == c)


@dataclass(frozen=True)
class CodingMatrix:
    """K x n coefficient matrix; row j is the profile of atom j."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise LengthMismatch("coding matrix must be 2-D")
        if not np.all(np.isfinite(v)):
            r, c = np.argwhere(~np.isfinite(v))[0]
            raise NonFiniteEntry(int(r), int(c))
        object.__setattr__(self, "values", _freeze(v))

    @property
    def n_atoms(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class HyperParams:
    """Training and classification hyperparameters.

    ``delta=None`` selects a scale-adaptive heat-kernel bandwidth (mean
    pairwise atom distance); ``ridge_eps=None`` selects the scale-invariant
    dictionary-update ridge ``1e-10 * trace(Z Z^T) / K``.
    """

    lambda1: float = 1e-3
    lambda2: float = 1e-6
    theta: float = 0.2
    eta1: float = 1e-2
    eta2: float = 5.0
    atoms_per_class: int = 10
    knn_k: int = 5
    delta: float | None = None
    max_iters: int = 15
    ridge_eps: float | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "theta", "eta1", "eta2"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v!r}")
        if self.atoms_per_class < 1:
            raise ValueError("atoms_per_class must be positive")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive when given")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.ridge_eps is not None and self.ridge_eps < 0:
            raise ValueError("ridge_eps must be nonnegative when given")


def validate_dataset(ds: LabeledDataset) -> None:
    """Raise the first violated dataset invariant; return silently when valid."""
    x = ds.features.values
    if ds.labels.shape[0] != x.shape[1]:
        raise LengthMismatch(
            f"{ds.labels.shape[0]} labels for {x.shape[1]} samples"
        )
    if not np.all(np.isfinite(x)):
        r, c = np.argwhere(~np.isfinite(x))[0]
        raise NonFiniteEntry(int(r), int(c))
    if np.any(ds.labels < 1) or np.any(ds.labels > ds.num_classes):
        raise ClassOutOfRange(f"labels must lie in 1..{ds.num_classes}")
    present = np.unique(ds.labels)
    for c in range(1, ds.num_classes + 1):
        if c not in present:
            raise EmptyClass(c)


def one_vs_all_targets(labels: np.ndarray, c: int) -> np.ndarray:
    """+1 where the label equals class ``c``, -1 elsewhere."""
    labels = np.asarray(labels)
    cmax = int(labels.max()) if labels.size else 0
    if c < 1 or c > cmax:
        raise ClassOutOfRange(f"class {c} outside 1..{cmax}")
    return np.where(labels == c, 1.0, -1.0)


def encode_labels(raw_labels) -> tuple[np.ndarray, list[str]]:
    """Map arbitrary external labels to dense 1..C.

    Classes are ordered by sorted external label so the encoding is stable
    across runs. Returns the 1-based labels and the external names in class
    order (index c-1 holds the name of class c).
    """
    raw = [str(v) for v in raw_labels]
    names = sorted(set(raw), key=_label_sort_key)
    index = {name: i + 1 for i, name in enumerate(names)}
    return np.array([index[v] for v in raw], dtype=np.int64), names


def _label_sort_key(name: str):
    try:
        return (0, float(name), name)
    except ValueError:
        return (1, 0.0, name)
