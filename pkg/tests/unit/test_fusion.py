import pytest

from hwpd.classification import ClassifierKind
from hwpd.errors import NoScores
from hwpd.evaluation.fusion import fuse_scores_mean, normalize_score, normalize_scores
from hwpd.schemas import ScoreEntry, ScoreSet


def _score_set(task, scores, labels=None):
    labels = labels or {s: 1 for s in scores}
    return ScoreSet(experiment="yhc-vs-pd", task=task, family="all", classifier="svm", entries=[
        ScoreEntry(subject_id=s, label=labels[s], raw_score=v, normalized_score=v, predicted=int(v >= 0.5))
        for s, v in scores.items()
    ])


def test_mean_of_three_tasks():
    fused = fuse_scores_mean([
        _score_set("Cube", {"S1": 0.2}),
        _score_set("House", {"S1": 0.4}),
        _score_set("Spiral", {"S1": 0.6}),
    ])
    assert fused.task is None
    assert fused.scores == [pytest.approx(0.4)]
    assert fused.predicted == [0]


def test_missing_tasks_average_what_is_available():
    fused = fuse_scores_mean([
        _score_set("Cube", {"S2": 0.9, "S1": 0.1}, labels={"S1": 0, "S2": 1}),
        _score_set("House", {"S2": 0.7}, labels={"S2": 1}),
    ])
    assert fused.subject_ids == ["S1", "S2"]
    assert fused.scores == [pytest.approx(0.1), pytest.approx(0.8)]
    assert fused.labels == [0, 1]
    assert fused.predicted == [0, 1]


def test_half_is_positive():
    fused = fuse_scores_mean([_score_set("Cube", {"S1": 0.25}), _score_set("House", {"S1": 0.75})])
    assert fused.predicted == [1]


def test_fusion_errors():
    with pytest.raises(NoScores):
        fuse_scores_mean([])
    with pytest.raises(ValueError):
        fuse_scores_mean([_score_set("Cube", {"S1": 0.2}), _score_set("Cube", {"S1": 0.4})])


@pytest.mark.parametrize(
    "input,expected_output",
    [
        ((ClassifierKind.SVM, 0.0), 0.5),
        ((ClassifierKind.KNN, 2 / 3), 2 / 3),
        ((ClassifierKind.MLP, 1.2), 1.0),
        (("mlp", -0.1), 0.0),
    ]
)
def test_normalize_score(input, expected_output):
    assert normalize_score(*input) == pytest.approx(expected_output)


def test_svm_scores_keep_their_order():
    normalized = normalize_scores(ClassifierKind.SVM, [-3.0, -0.5, 0.2, 4.0])
    assert normalized == sorted(normalized)
    assert all(0.0 < v < 1.0 for v in normalized)
