import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from locdict.model import Dictionary, FeatureMatrix, LabeledDataset


def random_dictionary(rng, m, K, num_classes=1):
    """Unit-norm random atoms grouped into num_classes contiguous blocks."""
    atoms = rng.standard_normal((m, K))
    atoms /= np.linalg.norm(atoms, axis=0)
    base, extra = divmod(K, num_classes)
    labels = []
    for c in range(1, num_classes + 1):
        labels.extend([c] * (base + (1 if c <= extra else 0)))
    return Dictionary(atoms, np.array(labels))


def random_dataset(rng, m, n, num_classes):
    X = rng.standard_normal((m, n))
    labels = np.concatenate(
        [np.arange(1, num_classes + 1), rng.integers(1, num_classes + 1, size=n - num_classes)]
    )
    return LabeledDataset(FeatureMatrix(X), np.sort(labels), num_classes)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
