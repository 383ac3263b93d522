import numpy as np
import pytest

from hwpd.classification import (
    ClassifierKind, KNNClassifier, LabeledSet, MLPClassifier, SVMClassifier, build_classifier, grid_points,
    grid_search_loocv, loocv_scores, score_classifier, train_classifier
)
from hwpd.classification.grid_search import mlp_hidden
from hwpd.config import ClassificationSettings, Settings
from hwpd.errors import ProtocolLeak, TooFewRows
from hwpd.evaluation.provenance import LeakageAuditor, audit_provenance
from hwpd.features.standardization import fit_standardization
from hwpd.schemas import GridSpec
from .conftest import blobs

FAST = Settings(classification=ClassificationSettings(mlp_epochs=20))


def _blob_set(n_per_class=8, **kwargs):
    rows, labels = blobs(n_per_class, **kwargs)
    return LabeledSet(rows, labels, [f"S{i:03d}" for i in range(len(labels))])


def test_canonical_grid_order():
    grid = GridSpec(knn_k=[7, 3, 5, 3], svm_c=[10, 1], svm_gamma=[1, 0.1], mlp_layouts=[30, 5])

    assert grid_points(ClassifierKind.KNN, grid) == [{"k": 3}, {"k": 5}, {"k": 7}]
    assert grid_points(ClassifierKind.SVM, grid) == [
        {"C": 1.0, "gamma": 0.1}, {"C": 1.0, "gamma": 1.0}, {"C": 10.0, "gamma": 0.1}, {"C": 10.0, "gamma": 1.0}
    ]
    assert grid_points(ClassifierKind.MLP, grid) == [{"layout": 5}, {"layout": 30}]
    assert len(grid_points(ClassifierKind.SVM, GridSpec())) == 64


@pytest.mark.parametrize(
    "input,expected_error",
    [
        (dict(knn_k=[]), ValueError),
        (dict(svm_c=[0.0, 1.0]), ValueError),
    ]
)
def test_grid_is_validated(input, expected_error):
    with pytest.raises(expected_error):
        GridSpec(**input)


@pytest.mark.parametrize(
    "input,expected_output",
    [
        ((15, "width"), (15,)),
        ((3, "depth"), (10, 10, 10)),
    ]
)
def test_mlp_layout_interpretation(input, expected_output):
    layout, interpretation = input
    assert mlp_hidden(layout, ClassificationSettings(mlp_interpretation=interpretation)) == expected_output


def test_build_classifier():
    assert isinstance(build_classifier(ClassifierKind.KNN, {"k": 5}), KNNClassifier)
    svm = build_classifier(ClassifierKind.SVM, {"C": 2, "gamma": 0.5}, seed=4)
    assert isinstance(svm, SVMClassifier) and svm.C == 2.0 and svm.seed == 4
    mlp = build_classifier("mlp", {"layout": 15}, settings=FAST)
    assert isinstance(mlp, MLPClassifier) and mlp.layout == (15,) and mlp.epochs == 20


def test_train_and_score():
    data = _blob_set()
    model = train_classifier(ClassifierKind.KNN, data, {"k": 3})
    score, label = score_classifier(model, data.rows[-1])
    assert (score, label) == (1.0, 1)


def test_loocv_folds_hold_out_one_subject():
    data = _blob_set(5)
    scores, predicted, folds = loocv_scores(data, ClassifierKind.KNN, {"k": 3})

    assert len(scores) == len(predicted) == len(folds) == 10
    np.testing.assert_array_equal(predicted, data.labels)
    for (held_out, standardization_rows, training_rows), subject in zip(folds, data.ids):
        assert held_out == subject
        assert held_out not in standardization_rows and held_out not in training_rows
        assert len(training_rows) == 9


def test_absent_features_are_tolerated():
    data = _blob_set(5)
    data.rows[0, 1] = np.nan
    scores, _, _ = loocv_scores(data, ClassifierKind.KNN, {"k": 3})
    assert np.all(np.isfinite(scores))


def test_singleton_grid():
    result = grid_search_loocv(_blob_set(), ClassifierKind.KNN, GridSpec(knn_k=[3]))
    assert result.best == {"k": 3}
    assert len(result.table) == 1
    assert result.best_accuracy == 1.0


@pytest.mark.parametrize("kind", [ClassifierKind.KNN, ClassifierKind.SVM])
def test_separable_data_is_learned(kind):
    grid = GridSpec(knn_k=[3, 5], svm_c=[1, 10], svm_gamma=[0.1, 1])
    result = grid_search_loocv(_blob_set(), kind, grid)
    assert result.best_accuracy == 1.0
    np.testing.assert_array_equal(result.predicted, _blob_set().labels)


def test_ties_go_to_the_first_point():
    """Every k separates the blobs, so the smallest k wins"""
    result = grid_search_loocv(_blob_set(), ClassifierKind.KNN, GridSpec(knn_k=[7, 5, 3]))
    assert [p.accuracy for p in result.table] == [1.0, 1.0, 1.0]
    assert result.best == {"k": 3}


@pytest.mark.slow
def test_mlp_grid():
    result = grid_search_loocv(_blob_set(5), ClassifierKind.MLP, GridSpec(mlp_layouts=[2, 4]), seed=1,
                               settings=FAST)
    assert result.best in ({"layout": 2}, {"layout": 4})
    assert len(result.scores) == 10


def test_too_few_rows():
    data = LabeledSet(np.zeros((3, 2)), np.array([0, 1, 1]))
    with pytest.raises(TooFewRows):
        grid_search_loocv(data, ClassifierKind.KNN, GridSpec(knn_k=[1]))


def test_grid_search_is_deterministic():
    grid = GridSpec(svm_c=[0.1, 1], svm_gamma=[0.5])
    data = _blob_set(6, distance=1.0, std=1.0, seed=3)
    first = grid_search_loocv(data, ClassifierKind.SVM, grid, seed=2)
    second = grid_search_loocv(data, ClassifierKind.SVM, grid, seed=2)

    assert first.table == second.table
    np.testing.assert_array_equal(first.scores, second.scores)


def test_collector_sees_every_fold():
    auditor = LeakageAuditor()
    grid_search_loocv(_blob_set(4), ClassifierKind.KNN, GridSpec(knn_k=[1, 3]), collector=auditor, task="Circle")

    assert audit_provenance(auditor) == {"folds": 2 * 8, "grid_rows": 8, "leaks": 0}


def test_folds_record_the_rows_each_fit_consumed():
    data = _blob_set(3)
    _, _, folds = loocv_scores(data, ClassifierKind.KNN, {"k": 1})
    held_out, standardization_rows, training_rows = folds[2]

    assert held_out == "S002"
    assert standardization_rows == training_rows == ["S000", "S001", "S003", "S004", "S005"]


def test_leaky_standardization_is_caught(monkeypatch):
    """Standardization fitted on every row lets each held-out subject in"""
    data = _blob_set(5)
    monkeypatch.setattr("hwpd.classification.grid_search.fit_standardization",
                        lambda rows, ids=None: fit_standardization(data.rows, data.ids))
    auditor = LeakageAuditor()
    grid_search_loocv(data, ClassifierKind.KNN, GridSpec(knn_k=[3]), collector=auditor, task="Circle")

    assert auditor.summary() == {"folds": 10, "grid_rows": 10, "leaks": 10}
    assert auditor.violations[0] == "Circle: held-out S000 entered the standardization fit"
    with pytest.raises(ProtocolLeak):
        audit_provenance(auditor)


def test_leaky_training_is_caught(monkeypatch):
    data = _blob_set(5)
    monkeypatch.setattr("hwpd.classification.grid_search.train_classifier",
                        lambda kind, rows, params, seed=0, settings=None: train_classifier(kind, data, params))
    auditor = LeakageAuditor()
    grid_search_loocv(data, ClassifierKind.KNN, GridSpec(knn_k=[3]), collector=auditor, task="Circle")

    assert auditor.summary()["leaks"] == 10
    assert all(v.endswith("entered the training rows") for v in auditor.violations)
    with pytest.raises(ProtocolLeak):
        audit_provenance(auditor)
