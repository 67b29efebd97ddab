"""Seeded synthetic benchmark generator: Gaussian class clusters."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .model import FeatureMatrix, LabeledDataset


def make_blobs(
    classes: int,
    dim: int,
    per_class: int,
    separation: float,
    seed: int,
    spread: float = 1.0,
) -> LabeledDataset:
    """Gaussian clusters around seeded unit-sphere means scaled by ``separation``.

    ``separation=0`` collapses every class onto a shared mean at the origin.
    """
    if classes < 1 or dim < 1 or per_class < 1:
        raise ConfigError("classes, dim, and per_class must be positive")
    if separation < 0 or spread < 0:
        raise ConfigError("separation and spread must be nonnegative")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((dim, classes))
    norms = np.linalg.norm(means, axis=0)
    norms[norms == 0] = 1.0
    means = separation * means / norms[None, :]
    cols = []
    labels = []
    for c in range(classes):
        pts = means[:, c:c + 1] + spread * rng.standard_normal((dim, per_class))
        cols.append(pts)
        labels.extend([c + 1] * per_class)
    return LabeledDataset(
        FeatureMatrix(np.concatenate(cols, axis=1)),
        np.array(labels, dtype=np.int64),
        classes,
    )
