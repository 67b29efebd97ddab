import numpy as np
import pytest

from conftest import random_dictionary
from locdict import errors
from locdict.graph import (
    knn_similarity,
    laplacian,
    locality_energy,
    mean_pairwise_distance,
)
from locdict.model import Dictionary


def brute_force_energy(Z, M):
    """Direct pairwise double sum (1/2) sum_ij M_ij ||zhat_i - zhat_j||^2."""
    K = M.shape[0]
    total = 0.0
    for i in range(K):
        for j in range(K):
            diff = Z[i, :] - Z[j, :]
            total += M[i, j] * float(diff @ diff)
    return 0.5 * total


class TestKnnSimilarity:
    def test_duplicate_atoms_give_unit_raw_weight(self):
        v = np.array([1.0, 0.0])
        atoms = np.column_stack([v, v, [0.0, 1.0]])
        d = Dictionary(atoms, np.array([1, 1, 1]))
        M = knn_similarity(d, 1, delta=1.0)
        # atoms 0 and 1 coincide, pick each other as sole neighbor
        assert M[0, 1] == pytest.approx(1.0)

    def test_orthogonal_atoms_heat_kernel_value(self):
        d = Dictionary(np.eye(2), np.array([1, 1]))
        M = knn_similarity(d, 1, delta=np.sqrt(2.0))
        # distance sqrt(2), bandwidth sqrt(2): exp(-1) in both directions
        assert M[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_non_neighbors_are_zero(self):
        rng = np.random.default_rng(3)
        d = random_dictionary(rng, 6, 8)
        M = knn_similarity(d, 2, delta=1.0)
        dist = np.linalg.norm(
            d.atoms[:, :, None] - d.atoms[:, None, :], axis=0
        )
        for i in range(8):
            order = [j for j in np.argsort(dist[i], kind="stable") if j != i]
            far = order[4:]
            for j in far:
                if i not in [x for x in np.argsort(dist[j], kind="stable") if x != j][:2]:
                    assert M[i, j] == 0.0

    def test_k_too_large(self):
        d = Dictionary(np.eye(3), np.array([1, 1, 1]))
        with pytest.raises(errors.KTooLarge):
            knn_similarity(d, 3, delta=1.0)

    def test_non_positive_delta(self):
        d = Dictionary(np.eye(3), np.array([1, 1, 1]))
        with pytest.raises(errors.NonPositiveDelta):
            knn_similarity(d, 1, delta=0.0)

    def test_symmetric_zero_diagonal(self, rng):
        d = random_dictionary(rng, 5, 7)
        M = knn_similarity(d, 3, delta=0.7)
        np.testing.assert_array_equal(M, M.T)
        np.testing.assert_array_equal(np.diag(M), np.zeros(7))
        assert np.all((M >= 0) & (M <= 1))


class TestLaplacian:
    def test_zero_similarity(self):
        bundle = laplacian(np.zeros((4, 4)))
        np.testing.assert_array_equal(bundle.laplacian, np.zeros((4, 4)))

    def test_two_node_graph(self):
        bundle = laplacian(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_array_equal(bundle.laplacian, [[1.0, -1.0], [-1.0, 1.0]])

    def test_constant_null_space(self, rng):
        d = random_dictionary(rng, 4, 6)
        bundle = laplacian(knn_similarity(d, 2, delta=1.0))
        np.testing.assert_allclose(bundle.laplacian @ np.ones(6), 0.0, atol=1e-12)

    def test_rejects_asymmetric(self):
        with pytest.raises(errors.AsymmetricInput):
            laplacian(np.array([[0.0, 1.0], [0.5, 0.0]]))

    def test_rejects_negative(self):
        with pytest.raises(errors.NegativeSimilarity):
            laplacian(np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_psd_row_sums_many_random(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            K = int(rng.integers(3, 9))
            d = random_dictionary(rng, int(rng.integers(2, 7)), K)
            bundle = laplacian(knn_similarity(d, int(rng.integers(1, K)), delta=1.0))
            L = bundle.laplacian
            assert np.max(np.abs(L - L.T)) == 0.0
            assert np.max(np.abs(L.sum(axis=1))) <= 1e-12
            assert np.linalg.eigvalsh(L).min() >= -1e-10


class TestLocalityEnergy:
    def test_zero_laplacian(self):
        assert locality_energy(np.ones((3, 4)), np.zeros((3, 3))) == 0.0

    def test_identical_profiles(self, rng):
        d = random_dictionary(rng, 4, 5)
        L = laplacian(knn_similarity(d, 2, delta=1.0)).laplacian
        Z = np.tile(rng.standard_normal(6), (5, 1))
        assert abs(locality_energy(Z, L)) <= 1e-10

    def test_hand_instance(self):
        L = np.array([[1.0, -1.0], [-1.0, 1.0]])
        Z = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert locality_energy(Z, L) == pytest.approx(1.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            K = int(rng.integers(2, 9))
            n = int(rng.integers(1, 9))
            d = random_dictionary(rng, int(rng.integers(2, 7)), K)
            M = knn_similarity(d, int(rng.integers(1, K)), delta=0.8)
            L = laplacian(M).laplacian
            Z = rng.standard_normal((K, n))
            expected = brute_force_energy(Z, M)
            got = locality_energy(Z, L)
            assert got == pytest.approx(expected, rel=1e-10, abs=1e-12)
            assert got >= -1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(errors.DimensionMismatch):
            locality_energy(np.ones((3, 2)), np.zeros((4, 4)))


def test_delta_scale_invariance(rng):
    # scaling all atom distances by s while scaling delta by s leaves M fixed
    m, K = 5, 6
    atoms = rng.standard_normal((m, K))
    atoms /= np.linalg.norm(atoms, axis=0)
    d1 = Dictionary(atoms, np.ones(K, dtype=int))
    s = 3.7
    scaled = np.vstack([atoms * s, np.zeros((1, K))])
    scaled /= np.linalg.norm(scaled, axis=0)
    # direct construction instead: same kNN sets, exp arguments match when
    # distances and delta scale together; verify via the kernel formula
    delta = 0.9
    M1 = knn_similarity(d1, 2, delta)
    dist = np.linalg.norm(atoms[:, :, None] - atoms[:, None, :], axis=0)
    raw = np.zeros((K, K))
    for i in range(K):
        order = [j for j in np.argsort(dist[i], kind="stable") if j != i][:2]
        raw[i, order] = np.exp(-(s * dist[i, order]) / (s * delta))
    M2 = 0.5 * (raw + raw.T)
    np.fill_diagonal(M2, 0.0)
    np.testing.assert_allclose(M1, M2, rtol=1e-12, atol=1e-15)


def test_mean_pairwise_distance_positive(rng):
    d = random_dictionary(rng, 4, 6)
    assert mean_pairwise_distance(d.atoms) > 0
