import os
import tempfile

import numpy as np
import pytest

from hwpd.classification import KNNClassifier, load_model
from hwpd.errors import DimensionMismatch, NonFiniteFeature, SingleClass
from .conftest import blobs


def _brute_force_score(rows, labels, x, k):
    order = sorted(range(len(rows)), key=lambda i: (float(np.linalg.norm(rows[i] - x)), i))
    return sum(labels[i] for i in order[:k]) / k


def test_three_neighbours_with_one_positive():
    rows = np.array([[0.0], [1.0], [2.0], [3.0], [10.0]])
    labels = np.array([1, 0, 0, 1, 1])
    model = KNNClassifier(k=3).fit(rows, labels)

    score, label = model.score_one([0.4])
    assert score == pytest.approx(1 / 3)
    assert label == 0


@pytest.mark.parametrize(
    "input,expected_output",
    [
        (([[1.0], [-1.0]], [1, 0]), 1.0),
        (([[-1.0], [1.0]], [1, 0]), 1.0),
        (([[1.0], [-1.0]], [0, 1]), 0.0),
    ]
)
def test_distance_ties_go_to_the_lower_index(input, expected_output):
    rows, labels = input
    model = KNNClassifier(k=1).fit(np.array(rows), np.array(labels))
    assert model.score_one([0.0])[0] == expected_output


def test_tied_vote_is_class_zero():
    model = KNNClassifier(k=2).fit(np.array([[0.0], [1.0], [5.0]]), np.array([0, 1, 1]))
    assert model.score_one([0.5]) == (0.5, 0)


def test_matches_brute_force(rng):
    rows = rng.normal(size=(30, 3))
    labels = np.array([0, 1] * 15)
    queries = rng.normal(size=(20, 3))
    for k in (1, 3, 5, 7):
        model = KNNClassifier(k=k).fit(rows, labels)
        expected = [_brute_force_score(rows, labels, x, k) for x in queries]
        np.testing.assert_allclose(model.decision_function(queries), expected)


def test_k_larger_than_the_training_set():
    model = KNNClassifier(k=15).fit(np.array([[0.0], [1.0], [2.0]]), np.array([0, 1, 1]))
    assert model.score_one([0.0])[0] == pytest.approx(2 / 3)


@pytest.mark.parametrize(
    "rows,labels,expected_error",
    [
        ([[0.0], [1.0]], [1, 1], SingleClass),
        ([[0.0], [np.nan]], [0, 1], NonFiniteFeature),
    ]
)
def test_training_set_is_checked(rows, labels, expected_error):
    with pytest.raises(expected_error):
        KNNClassifier().fit(np.array(rows), np.array(labels))


def test_scored_rows_are_checked():
    model = KNNClassifier().fit(*blobs(5))
    with pytest.raises(DimensionMismatch):
        model.score_one([0.0, 0.0, 0.0])
    with pytest.raises(NonFiniteFeature):
        model.score_one([np.inf, 0.0])


def test_save_load():
    rows, labels = blobs(10)
    model = KNNClassifier(k=5, seed=3).fit(rows, labels)
    with tempfile.TemporaryDirectory(prefix="hwpd_model_") as tmp:
        path = os.path.join(tmp, "model.json")
        model.save(path, task="Circle")
        loaded, model_file = load_model(path)

    assert isinstance(loaded, KNNClassifier)
    assert loaded.k == 5 and loaded.seed == 3
    assert model_file.kind == "knn" and model_file.task == "Circle"
    np.testing.assert_array_equal(loaded.decision_function(rows), model.decision_function(rows))
