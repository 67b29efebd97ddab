import numpy as np
import pytest

import oracles
from conftest import random_dictionary
from locdict import errors
from locdict.coder import (
    ActiveSet,
    active_classes,
    code_all,
    code_initial,
    code_with_svm,
    quad_hinge,
)
from locdict.graph import knn_similarity, laplacian
from locdict.model import Dictionary, HyperParams
from locdict.svm import SvmModel


def make_L(rng, d, k=2):
    return laplacian(knn_similarity(d, k, delta=1.0)).laplacian


class TestQuadHinge:
    @pytest.mark.parametrize("margin,expected", [(1.0, 0.0), (0.0, 1.0), (-1.0, 4.0)])
    def test_margin_values(self, margin, expected):
        # u^T z = margin with y = +1, b = 0
        z = np.array([margin])
        assert quad_hinge(z, 1.0, np.array([1.0]), 0.0) == pytest.approx(expected)

    def test_satisfied_margin_is_free(self):
        assert quad_hinge(np.array([5.0]), 1.0, np.array([1.0]), 0.0) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(errors.DimensionMismatch):
            quad_hinge(np.ones(2), 1.0, np.ones(3), 0.0)


class TestActiveClasses:
    def test_zero_svm_activates_everything(self):
        svm = SvmModel.zeros(3, 4)
        phi = active_classes(np.ones(3), np.array([1.0, -1.0, -1.0, -1.0]), svm)
        assert phi.classes == frozenset({1, 2, 3, 4})

    def test_all_margins_satisfied(self):
        svm = SvmModel(np.array([[2.0, -2.0]]), np.zeros(2))
        phi = active_classes(np.array([1.0]), np.array([1.0, -1.0]), svm)
        assert len(phi) == 0

    def test_only_violating_class_active(self):
        # margins 0.5 and 1.5
        svm = SvmModel(np.array([[0.5, 1.5]]), np.zeros(2))
        phi = active_classes(np.array([1.0]), np.array([1.0, 1.0]), svm)
        assert phi.classes == frozenset({1})


class TestCodeInitial:
    def test_identity_dictionary(self):
        d = Dictionary(np.eye(3), np.array([1, 1, 1]))
        x = np.array([1.0, -2.0, 0.5])
        np.testing.assert_allclose(code_initial(d, np.zeros((3, 3)), x, 0.0), x, rtol=1e-12)

    def test_identity_laplacian_halves(self):
        d = Dictionary(np.eye(3), np.array([1, 1, 1]))
        x = np.array([1.0, -2.0, 0.5])
        z = code_initial(d, np.eye(3), x, 1.0)
        np.testing.assert_allclose(z, x / 2.0, rtol=1e-12)

    def test_normal_equation_residual(self, rng):
        d = random_dictionary(rng, 4, 3)
        L = make_L(rng, d)
        x = rng.standard_normal(4)
        lam = 0.3
        z = code_initial(d, L, x, lam)
        A = d.atoms.T @ d.atoms + lam * L
        rhs = d.atoms.T @ x
        assert np.linalg.norm(A @ z - rhs) <= 1e-8 * (1 + np.linalg.norm(rhs))

    def test_matches_descent_oracle(self, rng):
        d = random_dictionary(rng, 4, 3)
        L = make_L(rng, d)
        x = rng.standard_normal(4)
        z = code_initial(d, L, x, 0.2)
        z_oracle = oracles.minimize_coding(d.atoms, L, x, 0.2)
        obj = oracles.coding_objective(d.atoms, L, x, 0.2, z)
        obj_oracle = oracles.coding_objective(d.atoms, L, x, 0.2, z_oracle)
        assert obj == pytest.approx(obj_oracle, rel=1e-5)


class TestCodeWithSvm:
    def _instance(self, rng, C=3):
        d = random_dictionary(rng, 5, 4, num_classes=2)
        L = make_L(rng, d)
        x = rng.standard_normal(5)
        svm = SvmModel(rng.standard_normal((4, C)), rng.standard_normal(C))
        targets = np.array([1.0] + [-1.0] * (C - 1))
        return d, L, x, svm, targets

    def test_lambda2_zero_equals_code_initial_bitwise(self, rng):
        d, L, x, svm, targets = self._instance(rng)
        params = HyperParams(lambda1=0.1, lambda2=0.0)
        z1 = code_with_svm(d, L, x, params, svm, targets, ActiveSet(frozenset({1, 2})))
        z2 = code_initial(d, L, x, 0.1)
        np.testing.assert_array_equal(z1, z2)

    def test_empty_active_set_equals_code_initial_bitwise(self, rng):
        d, L, x, svm, targets = self._instance(rng)
        params = HyperParams(lambda1=0.1, lambda2=0.5)
        z1 = code_with_svm(d, L, x, params, svm, targets, ActiveSet())
        z2 = code_initial(d, L, x, 0.1)
        np.testing.assert_array_equal(z1, z2)

    def test_matches_descent_oracle_fixed_phi(self, rng):
        d, L, x, svm, targets = self._instance(rng)
        params = HyperParams(lambda1=0.05, lambda2=0.4, theta=0.2)
        phi = ActiveSet(frozenset({2}))
        z = code_with_svm(d, L, x, params, svm, targets, phi)
        z_oracle = oracles.minimize_coding_svm(
            d.atoms, L, x, params.lambda1, params.lambda2, params.theta,
            svm.normals, svm.biases, targets, sorted(phi.classes),
        )
        args = (d.atoms, L, x, params.lambda1, params.lambda2, params.theta,
                svm.normals, svm.biases, targets, sorted(phi.classes))
        obj = oracles.coding_svm_objective(*args, z)
        obj_oracle = oracles.coding_svm_objective(*args, z_oracle)
        assert obj <= obj_oracle + 1e-8
        assert obj == pytest.approx(obj_oracle, rel=1e-5)


class TestCodeAll:
    def _setup(self, rng, n=6):
        d = random_dictionary(rng, 5, 4, num_classes=2)
        L = make_L(rng, d)
        X = rng.standard_normal((5, n))
        labels = np.array([1, 1, 1, 2, 2, 2])[:n]
        svm = SvmModel(rng.standard_normal((4, 2)), rng.standard_normal(2))
        params = HyperParams(lambda1=0.1, lambda2=0.3, theta=0.2)
        return d, L, X, labels, svm, params

    def test_first_sweep_is_code_initial(self, rng):
        d, L, X, labels, svm, params = self._setup(rng)
        Z = code_all(d, L, X, params, svm, labels, iteration=1, Z_prev=None)
        for i in range(X.shape[1]):
            np.testing.assert_array_equal(
                Z.values[:, i], code_initial(d, L, X[:, i], params.lambda1)
            )

    def test_second_sweep_zero_svm_all_active(self, rng):
        d, L, X, labels, svm_rand, params = self._setup(rng)
        svm = SvmModel.zeros(4, 2)
        Z_prev = code_all(d, L, X, params, svm, labels, iteration=1, Z_prev=None)
        Z = code_all(d, L, X, params, svm, labels, iteration=2, Z_prev=Z_prev.values)
        for i in range(X.shape[1]):
            targets = np.where(np.arange(1, 3) == labels[i], 1.0, -1.0)
            expected = code_with_svm(
                d, L, X[:, i], params, svm, targets, ActiveSet(frozenset({1, 2}))
            )
            np.testing.assert_array_equal(Z.values[:, i], expected)

    def test_column_permutation_equivariance(self, rng):
        d, L, X, labels, svm, params = self._setup(rng)
        Z_prev = code_all(d, L, X, params, svm, labels, iteration=1, Z_prev=None)
        Z = code_all(d, L, X, params, svm, labels, iteration=2, Z_prev=Z_prev.values)
        perm = np.array([3, 1, 5, 0, 2, 4])
        Zp = code_all(
            d, L, X[:, perm], params, svm, labels[perm],
            iteration=2, Z_prev=Z_prev.values[:, perm],
        )
        np.testing.assert_array_equal(Zp.values, Z.values[:, perm])

    def test_stationarity_all_columns(self, rng):
        d, L, X, labels, svm, params = self._setup(rng)
        Z_prev = code_all(d, L, X, params, svm, labels, iteration=1, Z_prev=None)
        Z = code_all(d, L, X, params, svm, labels, iteration=2, Z_prev=Z_prev.values)
        w = 2.0 * params.lambda2 * params.theta
        for i in range(X.shape[1]):
            targets = np.where(np.arange(1, 3) == labels[i], 1.0, -1.0)
            phi = active_classes(Z_prev.values[:, i], targets, svm)
            A = d.atoms.T @ d.atoms + params.lambda1 * L
            rhs = d.atoms.T @ X[:, i]
            for c in phi:
                u = svm.normals[:, c - 1]
                A = A + w * np.outer(u, u)
                rhs = rhs + w * u * (targets[c - 1] - svm.biases[c - 1])
            res = np.linalg.norm(A @ Z.values[:, i] - rhs)
            assert res <= 1e-8 * (1 + np.linalg.norm(rhs))
