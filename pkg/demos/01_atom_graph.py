"""Walkthrough: the atom similarity graph and its Laplacian.

Builds a small dictionary, inspects the kNN heat-kernel similarity between
atoms, and shows that the Laplacian quadratic form measures how much coding
profiles disagree across similar atoms.
"""

import numpy as np

from locdict import Dictionary, knn_similarity, laplacian, locality_energy

rng = np.random.default_rng(0)

# Six unit-norm atoms in R^4: two tight clusters of three.
base_a = rng.standard_normal(4)
base_b = rng.standard_normal(4)
atoms = np.stack(
    [base_a + 0.05 * rng.standard_normal(4) for _ in range(3)]
    + [base_b + 0.05 * rng.standard_normal(4) for _ in range(3)],
    axis=1,
)
atoms /= np.linalg.norm(atoms, axis=0)
d = Dictionary(atoms, np.array([1, 1, 1, 2, 2, 2]))

sim = knn_similarity(d, knn_k=2, delta=1.0)
print("similarity matrix (exp of negative atom distance, kNN-sparsified):")
print(np.round(sim, 3))
print()
print("note the block structure: atoms within a cluster are mutual neighbours")
print()

bundle = laplacian(sim)
L = bundle.laplacian
print("Laplacian row sums (always zero):", np.round(L.sum(axis=1), 12))
print("smallest eigenvalue (never negative):", float(np.linalg.eigvalsh(L).min()))
print()

# Profiles that agree within each cluster cost nothing; profiles that
# disagree across strongly-connected atoms are penalized.
Z_smooth = np.vstack([np.ones((3, 5)), -np.ones((3, 5))])
Z_rough = rng.standard_normal((6, 5))
print("locality energy, cluster-constant profiles:", locality_energy(Z_smooth, L))
print("locality energy, random profiles:          ", locality_energy(Z_rough, L))
