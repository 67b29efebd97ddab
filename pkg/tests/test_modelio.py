import dataclasses

import numpy as np
import pytest

from locdict import errors
from locdict.ingest import PcaTransform, pca_fit
from locdict.model import FeatureMatrix, HyperParams
from locdict.modelio import MODEL_MAGIC, MODEL_VERSION, load_model, save_model
from locdict.synth import make_blobs
from locdict.trainer import train


@pytest.fixture(scope="module")
def trained():
    ds = make_blobs(2, 6, 10, 4.0, seed=3)
    params = HyperParams(atoms_per_class=2, knn_k=2, max_iters=3, seed=1)
    model, _ = train(ds, params)
    return model, ds


class TestRoundTrip:
    def test_arrays_exact(self, trained, tmp_path):
        model, _ = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        loaded, pca = load_model(p)
        assert pca is None
        np.testing.assert_array_equal(loaded.dictionary.atoms, model.dictionary.atoms)
        np.testing.assert_array_equal(
            loaded.dictionary.atom_labels, model.dictionary.atom_labels
        )
        np.testing.assert_array_equal(loaded.svm.normals, model.svm.normals)
        np.testing.assert_array_equal(loaded.svm.biases, model.svm.biases)
        np.testing.assert_array_equal(loaded.projector.matrix, model.projector.matrix)
        assert loaded.svm.converged == model.svm.converged
        assert loaded.label_names == model.label_names

    def test_params_exact(self, trained, tmp_path):
        model, _ = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        loaded, _ = load_model(p)
        assert loaded.params == model.params

    def test_adaptive_fields_survive_as_none(self, trained, tmp_path):
        model, _ = trained
        assert model.params.delta is None and model.params.ridge_eps is None
        p = tmp_path / "m.lcd"
        save_model(p, model)
        loaded, _ = load_model(p)
        assert loaded.params.delta is None
        assert loaded.params.ridge_eps is None

    def test_explicit_delta_survives(self, trained, tmp_path):
        model, ds = trained
        params = dataclasses.replace(model.params, delta=0.75, ridge_eps=1e-9)
        model2, _ = train(ds, params)
        p = tmp_path / "m.lcd"
        save_model(p, model2)
        loaded, _ = load_model(p)
        assert loaded.params.delta == 0.75
        assert loaded.params.ridge_eps == 1e-9

    def test_pca_round_trip(self, trained, tmp_path, rng):
        model, _ = trained
        pca = pca_fit(FeatureMatrix(rng.standard_normal((8, 20))), 6)
        p = tmp_path / "m.lcd"
        save_model(p, model, pca)
        _, loaded_pca = load_model(p)
        np.testing.assert_array_equal(loaded_pca.mean, pca.mean)
        np.testing.assert_array_equal(loaded_pca.basis, pca.basis)
        assert loaded_pca.explained_variance_ratio == pca.explained_variance_ratio

    def test_byte_identical_saves(self, trained, tmp_path):
        model, _ = trained
        p1, p2 = tmp_path / "a.lcd", tmp_path / "b.lcd"
        save_model(p1, model)
        save_model(p2, model)
        assert p1.read_bytes() == p2.read_bytes()

    def test_predictions_survive_round_trip(self, trained, tmp_path, rng):
        model, ds = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        loaded, _ = load_model(p)
        X = ds.features.values
        before, _, _, _ = model.classify_batch(X)
        after, _, _, _ = loaded.classify_batch(X)
        np.testing.assert_array_equal(before, after)


class TestVersioning:
    def test_header_magic(self, trained, tmp_path):
        model, _ = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        blob = p.read_bytes()
        assert blob[:4] == MODEL_MAGIC and blob[4] == MODEL_VERSION

    def test_bad_magic_rejected(self, trained, tmp_path):
        model, _ = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        blob = bytearray(p.read_bytes())
        blob[:4] = b"XXXX"
        p.write_bytes(bytes(blob))
        with pytest.raises(errors.ModelVersionError):
            load_model(p)

    def test_future_version_rejected(self, trained, tmp_path):
        model, _ = trained
        p = tmp_path / "m.lcd"
        save_model(p, model)
        blob = bytearray(p.read_bytes())
        blob[4] = 0x02
        p.write_bytes(bytes(blob))
        with pytest.raises(errors.ModelVersionError):
            load_model(p)
