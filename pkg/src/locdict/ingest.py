"""Feature-file loading, PCA reduction, and seeded per-class splitting.

Two on-disk feature formats are supported:

* CSV: one sample per row, optional header ``label,f1,...,fm``. When the
  header is present the first column holds the class label of each row.
* raw-f64: magic ``LCDM``, version byte 0x01, two little-endian u64 (m, n),
  then m*n little-endian f64 in column-major order, optionally followed by a
  label block: magic ``LBLS`` and n little-endian u32 labels.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionInconsistent,
    DimensionMismatch,
    InsufficientClassSamples,
    ParseError,
    TargetTooLarge,
)
from .model import FeatureMatrix, LabeledDataset, _freeze

RAW_MAGIC = b"LCDM"
RAW_VERSION = 0x01
LABEL_MAGIC = b"LBLS"


@dataclass(frozen=True)
class PcaTransform:
    """Centering vector plus an orthonormal projection basis."""

    mean: np.ndarray
    basis: np.ndarray  # m_in x m_out, orthonormal columns
    explained_variance_ratio: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _freeze(self.mean))
        object.__setattr__(self, "basis", _freeze(self.basis))


# -- loading ------------------------------------------------------------------

def load_matrix(path, fmt: str = "csv") -> tuple[FeatureMatrix, list[str] | None]:
    """Load a feature file; returns the matrix (samples as columns) and the
    per-sample raw labels when the file carries them, else None."""
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "raw-f64":
        return _load_raw(path)
    raise ParseError(0, f"unknown format {fmt!r}")


def _load_csv(path) -> tuple[FeatureMatrix, list[str] | None]:
    rows: list[list[float]] = []
    labels: list[str] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError(1, "empty file")
    first = lines[0].split(",")
    has_header = first[0].strip().lower() == "label"
    if has_header:
        labels = []
        lines = lines[1:]
        if not lines:
            raise ParseError(2, "header but no data rows")
    width = None
    for lineno, ln in enumerate(lines, start=2 if has_header else 1):
        fields = [f.strip() for f in ln.split(",")]
        if has_header:
            labels.append(fields[0])
            fields = fields[1:]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise DimensionInconsistent(lineno)
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from exc
    return FeatureMatrix(np.array(rows).T), labels


def _load_raw(path) -> tuple[FeatureMatrix, list[str] | None]:
    blob = Path(path).read_bytes()
    if len(blob) < 21 or blob[:4] != RAW_MAGIC:
        raise ParseError(0, "bad magic; not a raw-f64 feature file")
    if blob[4] != RAW_VERSION:
        raise ParseError(0, f"unsupported raw-f64 version {blob[4]}")
    m, n = struct.unpack_from("<QQ", blob, 5)
    offset = 21
    need = m * n * 8
    if len(blob) < offset + need:
        raise ParseError(0, "truncated payload")
    data = np.frombuffer(blob, dtype="<f8", count=m * n, offset=offset)
    X = data.reshape((m, n), order="F")
    offset += need
    labels = None
    if len(blob) > offset:
        if blob[offset:offset + 4] != LABEL_MAGIC:
            raise ParseError(0, "trailing bytes are not a label block")
        raw = np.frombuffer(blob, dtype="<u4", count=n, offset=offset + 4)
        labels = [str(int(v)) for v in raw]
    return FeatureMatrix(X), labels


def save_csv(path, X: np.ndarray, labels=None) -> None:
    """Write samples-as-columns X to CSV (one sample per row), with a label
    header when labels are given."""
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        if labels is not None:
            fh.write("label," + ",".join(f"f{j+1}" for j in range(X.shape[0])) + "\n")
        for i in range(X.shape[1]):
            row = ",".join(repr(float(v)) for v in X[:, i])
            if labels is not None:
                fh.write(f"{labels[i]},{row}\n")
            else:
                fh.write(row + "\n")


def save_raw(path, X: np.ndarray, labels=None) -> None:
    X = np.asarray(X, dtype=np.float64)
    m, n = X.shape
    parts = [RAW_MAGIC, bytes([RAW_VERSION]), struct.pack("<QQ", m, n)]
    parts.append(np.asfortranarray(X).astype("<f8").tobytes(order="F"))
    if labels is not None:
        parts.append(LABEL_MAGIC)
        parts.append(np.asarray(labels, dtype="<u4").tobytes())
    Path(path).write_bytes(b"".join(parts))


# -- PCA ----------------------------------------------------------------------

def pca_fit(X: FeatureMatrix, target: int | float) -> PcaTransform:
    """Fit a PCA basis on samples-as-columns data.

    ``target`` is either an output dimension (int) or a variance fraction in
    (0, 1]; for a fraction, the smallest dimension whose cumulative eigenvalue
    share reaches it is chosen. Basis column signs are fixed by making each
    column's largest-magnitude entry positive.
    """
    data = X.values
    m, n = data.shape
    if n < 2:
        raise TargetTooLarge("PCA needs at least two samples")
    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    eigvals = s**2 / (n - 1)
    total = float(eigvals.sum())
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size and s[0] > 0 else 0
    if isinstance(target, (int, np.integer)):
        m_out = int(target)
        if m_out < 1 or m_out > min(m, n):
            raise TargetTooLarge(f"target dimension {m_out} exceeds min(m, n) = {min(m, n)}")
    else:
        frac = float(target)
        if not 0 < frac <= 1:
            raise TargetTooLarge("variance fraction must lie in (0, 1]")
        if total == 0:
            m_out = 1
        else:
            share = np.cumsum(eigvals) / total
            m_out = int(np.searchsorted(share, frac - 1e-12) + 1)
            m_out = min(m_out, max(rank, 1))
    basis = u[:, :m_out].copy()
    for j in range(basis.shape[1]):
        lead = np.argmax(np.abs(basis[:, j]))
        if basis[lead, j] < 0:
            basis[:, j] = -basis[:, j]
    ratio = float(eigvals[:m_out].sum() / total) if total > 0 else 1.0
    return PcaTransform(mean=mean, basis=basis, explained_variance_ratio=ratio)


def pca_apply(t: PcaTransform, X: FeatureMatrix) -> FeatureMatrix:
    """Project samples-as-columns data onto the fitted basis."""
    data = X.values
    if data.shape[0] != t.mean.shape[0]:
        raise DimensionMismatch(
            f"data has {data.shape[0]} rows, transform expects {t.mean.shape[0]}"
        )
    return FeatureMatrix(t.basis.T @ (data - t.mean[:, None]))


# -- splitting ----------------------------------------------------------------

def split_per_class(
    ds: LabeledDataset, train_per_class: int, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded disjoint split with exactly train_per_class training samples per class."""
    train_idx = []
    test_idx = []
    rng = np.random.default_rng(seed)
    for c in range(1, ds.num_classes + 1):
        pool = np.flatnonzero(ds.labels == c)
        if pool.size < train_per_class + 1:
            raise InsufficientClassSamples(c)
        chosen = rng.choice(pool, size=train_per_class, replace=False)
        chosen_set = set(chosen.tolist())
        train_idx.extend(sorted(chosen_set))
        test_idx.extend(int(i) for i in pool if int(i) not in chosen_set)
    train_idx = np.array(sorted(train_idx))
    test_idx = np.array(sorted(test_idx))
    X = ds.features.values
    train = LabeledDataset(
        FeatureMatrix(X[:, train_idx]), ds.labels[train_idx], ds.num_classes
    )
    test = LabeledDataset(
        FeatureMatrix(X[:, test_idx]), ds.labels[test_idx], ds.num_classes
    )
    return train, test
