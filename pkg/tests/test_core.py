"""Dataset ingestion, normalization, and shuffle contracts."""

import json

import numpy as np
import pytest

from evasim.core import (
    Dataset,
    NormalizationMap,
    apply_normalizer,
    fit_normalizer,
    load_csv,
    load_vectors_csv,
    normalize_dataset,
    save_dataset_csv,
    save_vectors_csv,
    shuffle,
)
from evasim.rng import Rng


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_two_row_spam_ham(self, tmp_path):
        path = write(tmp_path, "t.csv", "1.0,2.0,spam\n3.0,4.0,ham\n")
        data = load_csv(path, label_column=2, positive_label="spam")
        assert data.n == 2 and data.d == 2
        assert list(data.labels) == [1, 0]
        assert np.allclose(data.samples, [[1, 2], [3, 4]])

    def test_header_row_and_label_by_name(self, tmp_path):
        path = write(tmp_path, "t.csv", "a,b,class\n1,2,x\n3,4,y\n")
        data = load_csv(path, label_column="class", positive_label="x")
        assert data.feature_names == ("a", "b")
        assert list(data.labels) == [1, 0]

    def test_non_numeric_cell_names_row_and_column(self, tmp_path):
        path = write(tmp_path, "t.csv", "a,b,class\n1,abc,x\n3,4,y\n")
        with pytest.raises(ValueError, match=r"row 0.*'b'"):
            load_csv(path, label_column="class", positive_label="x")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", label_column=0, positive_label="x")

    def test_unknown_label_column(self, tmp_path):
        path = write(tmp_path, "t.csv", "a,b,class\n1,2,x\n3,4,y\n")
        with pytest.raises(ValueError, match="unknown label column"):
            load_csv(path, label_column="nope", positive_label="x")

    def test_label_by_name_needs_header(self, tmp_path):
        path = write(tmp_path, "t.csv", "1,2,0\n3,4,1\n")
        with pytest.raises(ValueError, match="no header"):
            load_csv(path, label_column="class", positive_label="1")

    def test_single_class_file_accepted(self, tmp_path):
        path = write(tmp_path, "t.csv", "1,2,spam\n3,4,spam\n")
        data = load_csv(path, label_column=2, positive_label="spam")
        assert list(data.labels) == [1, 1]

    def test_negative_label_index(self, tmp_path):
        path = write(tmp_path, "t.csv", "1,2,spam\n3,4,ham\n")
        data = load_csv(path, label_column=-1, positive_label="spam")
        assert data.d == 2

    def test_ragged_rows_rejected(self, tmp_path):
        path = write(tmp_path, "t.csv", "1,2,spam\n3,4\n")
        with pytest.raises(ValueError, match="ragged"):
            load_csv(path, label_column=2, positive_label="spam")

    def test_categorical_one_hot_expansion(self, tmp_path):
        path = write(
            tmp_path, "t.csv",
            "size,color,class\n1,red,x\n2,blue,x\n3,red,y\n",
        )
        data = load_csv(
            path, label_column="class", positive_label="x",
            categorical_columns=["color"],
        )
        assert data.feature_names == ("size", "color=blue", "color=red")
        assert np.allclose(data.samples[:, 1:], [[0, 1], [1, 0], [0, 1]])


class TestNormalizer:
    def test_min_max_per_feature(self):
        data = Dataset(np.array([[2.0], [4.0], [6.0]]), [0, 1, 0])
        nmap = fit_normalizer(data)
        assert nmap.mins[0] == 2 and nmap.maxs[0] == 6

    def test_constant_and_single_row(self):
        data = Dataset(np.array([[5.0], [5.0], [5.0]]), [0, 1, 0])
        nmap = fit_normalizer(data)
        assert nmap.mins[0] == nmap.maxs[0] == 5
        single = Dataset(np.array([[3.0, 7.0]]), [0])
        nmap = fit_normalizer(single)
        assert np.allclose(nmap.mins, nmap.maxs)

    def test_apply_midpoint_clip_constant(self):
        nmap = NormalizationMap(("f0",), np.array([2.0]), np.array([6.0]))
        assert apply_normalizer(nmap, np.array([4.0]))[0] == 0.5
        assert apply_normalizer(nmap, np.array([8.0]), clip=True)[0] == 1.0
        assert apply_normalizer(nmap, np.array([8.0]), clip=False)[0] == 1.5
        constant = NormalizationMap(("f0",), np.array([5.0]), np.array([5.0]))
        assert apply_normalizer(constant, np.array([5.0]))[0] == 0.0

    def test_dimension_mismatch(self):
        nmap = NormalizationMap(("f0",), np.array([0.0]), np.array([1.0]))
        with pytest.raises(ValueError, match="dimension mismatch"):
            apply_normalizer(nmap, np.array([1.0, 2.0]))

    def test_round_trip_maps_training_data_into_unit_box(self):
        rng = Rng(1)
        samples = rng.normal(200).reshape(50, 4) * 3.0 + 10.0
        data = Dataset(samples, np.tile([0, 1], 25))
        normalized = normalize_dataset(fit_normalizer(data), data)
        assert normalized.samples.min() == 0.0
        assert normalized.samples.max() == 1.0
        assert (normalized.samples >= 0).all() and (normalized.samples <= 1).all()

    def test_json_schema_round_trip(self):
        nmap = NormalizationMap(("a", "b"), np.array([0.0, 2.0]), np.array([1.0, 6.0]))
        doc = json.loads(nmap.to_json())
        assert doc == {
            "features": [
                {"name": "a", "min": 0.0, "max": 1.0},
                {"name": "b", "min": 2.0, "max": 6.0},
            ]
        }
        back = NormalizationMap.from_json(nmap.to_json())
        assert back == nmap


class TestShuffle:
    def test_single_row_identity(self):
        data = Dataset(np.array([[1.0, 2.0]]), [1])
        out = shuffle(data, Rng(0))
        assert np.array_equal(out.samples, data.samples)

    def test_fixed_seed_repeatable(self):
        data = Dataset(np.arange(20.0).reshape(10, 2), np.tile([0, 1], 5))
        a = shuffle(data, Rng(5))
        b = shuffle(data, Rng(5))
        assert np.array_equal(a.samples, b.samples)
        assert np.array_equal(a.labels, b.labels)

    def test_multiset_of_labeled_samples_preserved(self):
        data = Dataset(np.arange(30.0).reshape(10, 3), np.tile([0, 1], 5))
        out = shuffle(data, Rng(9))
        before = sorted((tuple(s), l) for s, l in zip(data.samples, data.labels))
        after = sorted((tuple(s), l) for s, l in zip(out.samples, out.labels))
        assert before == after


class TestDataset:
    def test_label_validation(self):
        with pytest.raises(ValueError, match="labels must be 0"):
            Dataset(np.zeros((2, 2)), [0, 2])
        with pytest.raises(ValueError, match="one per sample"):
            Dataset(np.zeros((2, 2)), [0])

    def test_vectors_csv_round_trip(self, tmp_path):
        vectors = Rng(3).random(12).reshape(4, 3)
        path = tmp_path / "v.csv"
        save_vectors_csv(path, vectors)
        assert np.array_equal(load_vectors_csv(path), vectors)

    def test_labeled_dataset_csv_round_trip(self, tmp_path):
        data = Dataset(Rng(4).random(12).reshape(6, 2), [0, 1, 0, 1, 1, 0],
                       ("alpha", "beta"))
        path = tmp_path / "d.csv"
        save_dataset_csv(data, path)
        back = load_csv(path, "label", "1")
        assert back.feature_names == ("alpha", "beta")
        assert np.array_equal(back.samples, data.samples)
        assert np.array_equal(back.labels, data.labels)
