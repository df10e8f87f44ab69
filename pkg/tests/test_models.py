"""Classifier zoo: training contracts, tie rules, determinism, serialization."""

import numpy as np
import pytest

from evasim.core import Dataset
from evasim.models import (
    KINDS,
    KnnModel,
    LinearSVMModel,
    ModelSpec,
    holdout_accuracy,
    load_model,
    model_from_dict,
    predict_label,
    save_model,
    train,
)
from evasim.rng import Rng


def blobs_2d(n=400, separation=6.0, seed=1):
    rng = Rng(seed)
    half = n // 2
    samples = rng.normal(n * 2).reshape(n, 2)
    samples[half:] += separation / np.sqrt(2)
    samples = (samples - samples.min(0)) / (samples.max(0) - samples.min(0))
    labels = np.concatenate([np.zeros(half, dtype=int), np.ones(n - half, dtype=int)])
    return Dataset(samples, labels)


XOR_DATA = Dataset(
    np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]),
    [0, 0, 1, 1],
)


class TestLinearSVM:
    def test_separable_pair_1d(self):
        data = Dataset(np.array([[0.0], [1.0]]), [0, 1])
        model = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=3), data)
        assert holdout_accuracy(model, data) == 1.0
        assert model.w[0] > 0

    def test_sign_rule(self):
        model = LinearSVMModel(np.array([1.0]), -0.5)
        assert predict_label(model, np.array([0.4])) == 0
        assert predict_label(model, np.array([0.6])) == 1

    def test_boundary_tie_is_malicious(self):
        model = LinearSVMModel(np.array([1.0]), -0.5)
        assert predict_label(model, np.array([0.5])) == 1

    def test_blob_separation_accuracy(self):
        data = blobs_2d()
        model = train(ModelSpec(kind="linear_svm", c=1.0, train_seed=5), data)
        assert holdout_accuracy(model, data) >= 0.99


class TestKnn:
    def test_majority_of_equidistant_neighbors(self):
        model = KnnModel(
            np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]), np.array([0, 0, 1]), k=3
        )
        assert model.predict(np.array([0.0, 0.0])) == 0

    def test_vote_tie_is_malicious(self):
        model = KnnModel(
            np.array([[1.0, 0.0], [-1.0, 0.0]]), np.array([0, 1]), k=2
        )
        assert model.predict(np.array([0.0, 0.0])) == 1

    def test_k1_reproduces_training_labels(self):
        data = blobs_2d(n=60)
        model = train(ModelSpec(kind="knn", k=1), data)
        assert holdout_accuracy(model, data) == 1.0

    def test_k_larger_than_n_is_capped(self):
        model = KnnModel(np.array([[0.0], [1.0]]), np.array([0, 0]), k=10)
        assert model.predict(np.array([5.0])) == 0


class TestDecisionTree:
    def test_xor_needs_depth_two(self):
        model = train(ModelSpec(kind="decision_tree", min_leaf=1), XOR_DATA)
        assert holdout_accuracy(model, XOR_DATA) == 1.0
        assert model.depth >= 2

    def test_single_feature_split(self):
        data = Dataset(np.array([[0.0], [0.2], [0.8], [1.0]]), [0, 0, 1, 1])
        model = train(ModelSpec(kind="decision_tree", min_leaf=1), data)
        assert model.predict(np.array([0.1])) == 0
        assert model.predict(np.array([0.9])) == 1
        # threshold is the midpoint between the closest differing values
        assert model.threshold[0] == 0.5

    def test_batch_matches_single(self):
        data = blobs_2d(n=100)
        model = train(ModelSpec(kind="decision_tree"), data)
        probes = Rng(8).random(40).reshape(20, 2)
        batch = model.predict_batch(probes)
        assert list(batch) == [model.predict(p) for p in probes]


class TestRandomForest:
    def test_single_tree_no_bootstrap_equals_decision_tree(self):
        data = blobs_2d(n=120)
        tree = train(ModelSpec(kind="decision_tree", train_seed=2), data)
        forest = train(
            ModelSpec(
                kind="random_forest", n_trees=1, feature_fraction=1.0,
                bootstrap=False, train_seed=2,
            ),
            data,
        )
        probes = Rng(4).random(200).reshape(100, 2)
        assert np.array_equal(forest.predict_batch(probes), tree.predict_batch(probes))

    def test_fifty_trees_fit_blobs(self):
        data = blobs_2d(n=200)
        forest = train(ModelSpec(kind="random_forest", n_trees=50, train_seed=7), data)
        assert holdout_accuracy(forest, data) >= 0.97


class TestRbfSVM:
    def test_huge_gamma_approaches_nearest_neighbor(self):
        data = blobs_2d(n=80)
        model = train(ModelSpec(kind="rbf_svm", gamma=1e4, c=10.0, train_seed=1), data)
        assert np.array_equal(model.predict_batch(data.samples), data.labels)

    def test_blob_accuracy(self):
        data = blobs_2d(n=200)
        model = train(ModelSpec(kind="rbf_svm", gamma=0.1, c=1.0, train_seed=9), data)
        assert holdout_accuracy(model, data) >= 0.95


class TestHoldoutAccuracy:
    def test_ratios(self):
        data = Dataset(np.array([[0.0], [0.25], [0.75], [1.0]]), [0, 0, 1, 1])
        model = LinearSVMModel(np.array([1.0]), -0.5)
        assert holdout_accuracy(model, data) == 1.0
        wrong_on_one = Dataset(np.array([[0.0], [0.25], [0.75], [0.4]]), [0, 0, 1, 1])
        assert holdout_accuracy(model, wrong_on_one) == 0.75
        constant = LinearSVMModel(np.array([0.0]), 1.0)  # always malicious
        assert holdout_accuracy(constant, data) == 0.5

    def test_empty_rejected(self):
        model = LinearSVMModel(np.array([1.0]), 0.0)
        with pytest.raises(ValueError):
            holdout_accuracy(model, Dataset(np.zeros((0, 1)), []))


class TestTrainingContracts:
    def test_determinism_identical_spec_and_data(self):
        data = blobs_2d(n=150)
        probes = Rng(12).random(100).reshape(50, 2)
        for kind in KINDS:
            spec = ModelSpec(kind=kind, train_seed=42)
            a, b = train(spec, data), train(spec, data)
            assert np.array_equal(
                a.predict_batch(probes), b.predict_batch(probes)
            ), kind

    def test_single_class_rejected(self):
        data = Dataset(np.array([[0.0], [1.0]]), [1, 1])
        with pytest.raises(ValueError, match="both classes"):
            train(ModelSpec(kind="linear_svm"), data)

    def test_dimension_mismatch_on_predict(self):
        model = LinearSVMModel(np.array([1.0, 2.0]), 0.0)
        with pytest.raises(ValueError, match="dimension mismatch"):
            model.predict(np.array([1.0]))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ModelSpec(kind="nope")
        with pytest.raises(ValueError):
            ModelSpec(kind="linear_svm", c=0)
        with pytest.raises(ValueError):
            ModelSpec(kind="knn", k=0)
        with pytest.raises(ValueError):
            ModelSpec(kind="rbf_svm", gamma=-1)
        with pytest.raises(ValueError):
            ModelSpec(kind="random_forest", n_trees=0)


class TestSerialization:
    @pytest.mark.parametrize("kind", KINDS)
    def test_json_round_trip_preserves_predictions(self, kind, tmp_path):
        data = blobs_2d(n=100)
        model = train(ModelSpec(kind=kind, train_seed=3), data)
        path = tmp_path / f"{kind}.json"
        save_model(model, path)
        loaded = load_model(path)
        probes = Rng(6).random(80).reshape(40, 2)
        assert np.array_equal(
            loaded.predict_batch(probes), model.predict_batch(probes)
        )

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown model kind"):
            model_from_dict({"kind": "mystery"})
