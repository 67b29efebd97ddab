"""Binary model persistence.

Layout (all little-endian), magic ``LCDS`` then version byte 0x01:

* header: u64 m, K, C; f64 lambda1, lambda2, theta, eta1, eta2;
  i64 atoms_per_class, knn_k, max_iters, seed; f64 delta, ridge_eps
  (NaN encodes "adaptive" for the last two)
* atom matrix (m*K f64, column-major), atom labels (K i64)
* SVM normals (K*C f64, column-major), biases (C f64), converged flag (u8)
* projector matrix (K*m f64, column-major)
* PCA block: u8 present flag; when set, u64 m_in, u64 m_out, mean (m_in f64),
  basis (m_in*m_out f64, column-major), f64 explained_variance_ratio
* label map: u64 count, then per class u64 byte length + UTF-8 name

The file is self-contained: inference needs no training data.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .classifier import Projector
from .errors import ModelVersionError, ParseError
from .ingest import PcaTransform
from .model import Dictionary, HyperParams
from .svm import SvmModel
from .trainer import TrainedModel

MODEL_MAGIC = b"LCDS"
MODEL_VERSION = 0x01


def _mat_bytes(a: np.ndarray) -> bytes:
    return np.asfortranarray(np.asarray(a, dtype=np.float64)).tobytes(order="F")


def save_model(path, model: TrainedModel, pca: PcaTransform | None = None) -> None:
    d = model.dictionary
    m, K = d.atoms.shape
    C = model.svm.num_classes
    p = model.params
    parts = [MODEL_MAGIC, bytes([MODEL_VERSION])]
    parts.append(struct.pack("<QQQ", m, K, C))
    parts.append(struct.pack("<5d", p.lambda1, p.lambda2, p.theta, p.eta1, p.eta2))
    parts.append(struct.pack("<4q", p.atoms_per_class, p.knn_k, p.max_iters, p.seed))
    parts.append(struct.pack(
        "<2d",
        np.nan if p.delta is None else p.delta,
        np.nan if p.ridge_eps is None else p.ridge_eps,
    ))
    parts.append(_mat_bytes(d.atoms))
    parts.append(np.asarray(d.atom_labels, dtype="<i8").tobytes())
    parts.append(_mat_bytes(model.svm.normals))
    parts.append(np.asarray(model.svm.biases, dtype="<f8").tobytes())
    parts.append(bytes([1 if model.svm.converged else 0]))
    parts.append(_mat_bytes(model.projector.matrix))
    if pca is None:
        parts.append(bytes([0]))
    else:
        parts.append(bytes([1]))
        m_in, m_out = pca.basis.shape
        parts.append(struct.pack("<QQ", m_in, m_out))
        parts.append(np.asarray(pca.mean, dtype="<f8").tobytes())
        parts.append(_mat_bytes(pca.basis))
        parts.append(struct.pack("<d", pca.explained_variance_ratio))
    parts.append(struct.pack("<Q", len(model.label_names)))
    for name in model.label_names:
        raw = name.encode("utf-8")
        parts.append(struct.pack("<Q", len(raw)))
        parts.append(raw)
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise ParseError(0, "truncated model file")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def matrix(self, rows: int, cols: int) -> np.ndarray:
        data = np.frombuffer(self.take(rows * cols * 8), dtype="<f8")
        return data.reshape((rows, cols), order="F")


def load_model(path) -> tuple[TrainedModel, PcaTransform | None]:
    blob = Path(path).read_bytes()
    if blob[:4] != MODEL_MAGIC:
        raise ModelVersionError("not a locdict model file")
    if blob[4] != MODEL_VERSION:
        raise ModelVersionError(f"unsupported model version {blob[4]}")
    r = _Reader(blob)
    r.pos = 5
    m, K, C = r.unpack("<QQQ")
    lam1, lam2, theta, eta1, eta2 = r.unpack("<5d")
    apc, knn_k, max_iters, seed = r.unpack("<4q")
    delta, ridge_eps = r.unpack("<2d")
    params = HyperParams(
        lambda1=lam1, lambda2=lam2, theta=theta, eta1=eta1, eta2=eta2,
        atoms_per_class=int(apc), knn_k=int(knn_k),
        delta=None if np.isnan(delta) else float(delta),
        max_iters=int(max_iters),
        ridge_eps=None if np.isnan(ridge_eps) else float(ridge_eps),
        seed=int(seed),
    )
    atoms = r.matrix(m, K)
    atom_labels = np.frombuffer(r.take(K * 8), dtype="<i8")
    normals = r.matrix(K, C)
    biases = np.frombuffer(r.take(C * 8), dtype="<f8")
    converged = bool(r.take(1)[0])
    projector = r.matrix(K, m)
    pca = None
    if r.take(1)[0]:
        m_in, m_out = r.unpack("<QQ")
        mean = np.frombuffer(r.take(m_in * 8), dtype="<f8")
        basis = r.matrix(m_in, m_out)
        (evr,) = r.unpack("<d")
        pca = PcaTransform(mean=mean, basis=basis, explained_variance_ratio=evr)
    (count,) = r.unpack("<Q")
    names = []
    for _ in range(count):
        (ln,) = r.unpack("<Q")
        names.append(r.take(ln).decode("utf-8"))
    model = TrainedModel(
        dictionary=Dictionary(atoms, atom_labels),
        svm=SvmModel(normals=normals, biases=biases, converged=converged),
        params=params,
        projector=Projector(matrix=projector),
        label_names=names,
    )
    return model, pca
