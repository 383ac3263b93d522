"""
Leave-one-out grid search over the meta-parameters of a classifier.

Standardization is refitted inside every leave-one-out round on the training
rows of that round only.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from hwpd.classification.base import Classifier, ClassifierKind, LabeledSet, classifier_class
from hwpd.config import ClassificationSettings, Settings
from hwpd.errors import TooFewRows
from hwpd.features.standardization import apply_standardization, fit_standardization
from hwpd.schemas import GridPoint, GridSpec
from hwpd.utils import log_exec_timer, parallel_map

logger = logging.getLogger(__name__)

MIN_GRID_ROWS = 4

# held-out id, ids the standardization was fitted on, ids the model was trained on
FoldRecord = Tuple[str, List[str], List[str]]


def grid_points(kind: ClassifierKind, grid: GridSpec) -> List[Dict[str, Any]]:
    """Grid points in the canonical order that also breaks accuracy ties."""
    kind = ClassifierKind(kind)
    if kind is ClassifierKind.KNN:
        return [{"k": int(k)} for k in sorted(set(grid.knn_k))]
    if kind is ClassifierKind.SVM:
        return [{"C": float(c), "gamma": float(g)} for c in sorted(set(grid.svm_c)) for g in sorted(set(grid.svm_gamma))]
    return [{"layout": int(v)} for v in sorted(set(grid.mlp_layouts))]


def mlp_hidden(layout: int, settings: ClassificationSettings) -> Tuple[int, ...]:
    """A layout candidate read as the width of one hidden layer, or as the number of equal layers."""
    if settings.mlp_interpretation == "depth":
        return (settings.mlp_depth_width,) * int(layout)
    return (int(layout),)


def build_classifier(kind: ClassifierKind, params: Dict[str, Any], seed: int = 0,
                     settings: Optional[Settings] = None) -> Classifier:
    settings = settings or Settings()
    cls_settings = settings.classification
    kind = ClassifierKind(kind)
    cls = classifier_class(kind)
    if kind is ClassifierKind.KNN:
        return cls(k=int(params["k"]), seed=seed)
    if kind is ClassifierKind.SVM:
        return cls(C=float(params["C"]), gamma=float(params["gamma"]), tol=cls_settings.svm_tol,
                   max_iter=cls_settings.svm_max_iter, seed=seed)
    return cls(hidden=mlp_hidden(params["layout"], cls_settings), epochs=cls_settings.mlp_epochs,
               learning_rate=cls_settings.mlp_learning_rate, momentum=cls_settings.mlp_momentum,
               batch_size=cls_settings.mlp_batch_size, seed=seed)


def train_classifier(kind: ClassifierKind, data: LabeledSet, params: Dict[str, Any], seed: int = 0,
                     settings: Optional[Settings] = None) -> Classifier:
    """Fits a classifier of the given kind on already standardized rows."""
    return build_classifier(kind, params, seed, settings).fit(data.rows, data.labels, data.ids)


def score_classifier(model: Classifier, x) -> Tuple[float, int]:
    """Raw score of one feature vector and its label."""
    return model.score_one(x)


def _row_ids(data: LabeledSet) -> List[str]:
    return list(data.ids) if data.ids is not None else [str(i) for i in range(len(data))]


def loocv_scores(data: LabeledSet, kind: ClassifierKind, params: Dict[str, Any], seed: int = 0,
                 settings: Optional[Settings] = None) -> Tuple[np.ndarray, np.ndarray, List[FoldRecord]]:
    """
    Leave-one-out rounds with fixed meta-parameters. Rows may hold NaN for
    absent features.

    :return: (raw score of every held-out row, its label, the fold records)
    """
    ids = _row_ids(data)
    labeled = LabeledSet(data.rows, data.labels, ids)
    scores = np.empty(len(labeled))
    predicted = np.empty(len(labeled), dtype=int)
    folds: List[FoldRecord] = []
    for i in range(len(labeled)):
        train, held_out, _ = labeled.without(i)
        standardization = fit_standardization(train.rows, train.ids)
        model = train_classifier(kind, LabeledSet(apply_standardization(train.rows, standardization), train.labels,
                                                  train.ids), params, seed, settings)
        scores[i], predicted[i] = model.score_one(apply_standardization(held_out, standardization))
        folds.append((ids[i], list(standardization.fitted_on), list(model.trained_on_)))
    return scores, predicted, folds


def _evaluate_point(params: Dict[str, Any], data: LabeledSet, kind: ClassifierKind, seed: int,
                    settings: Settings) -> Tuple[float, np.ndarray, np.ndarray, List[FoldRecord]]:
    scores, predicted, folds = loocv_scores(data, kind, params, seed, settings)
    return float(np.mean(predicted == data.labels)), scores, predicted, folds


@dataclass
class GridSearchResult:
    best: Dict[str, Any]
    table: List[GridPoint]
    # leave-one-out raw scores and labels of the best point
    scores: np.ndarray
    predicted: np.ndarray
    folds: List[FoldRecord] = field(default_factory=list)

    @property
    def best_accuracy(self) -> float:
        return max(p.accuracy for p in self.table)


def grid_search_loocv(data: LabeledSet, kind: ClassifierKind, grid: GridSpec, seed: int = 0,
                      settings: Optional[Settings] = None, threads: int = 1,
                      collector=None, task: Optional[str] = None) -> GridSearchResult:
    """
    Leave-one-out accuracy of every grid point; the best is the first point
    of maximal accuracy in canonical order.

    :param collector: optional provenance collector receiving the grid rows and every fold
    :param task: task name reported to the collector
    """
    settings = settings or Settings()
    if len(data) < MIN_GRID_ROWS:
        raise TooFewRows(f"grid search needs at least {MIN_GRID_ROWS} rows, got {len(data)}")
    kind = ClassifierKind(kind)
    data = LabeledSet(data.rows, data.labels, _row_ids(data))
    points = grid_points(kind, grid)

    with log_exec_timer(f"grid search {kind.value} ({len(points)} points, {len(data)} rows)"):
        results = parallel_map(_evaluate_point, points, n_workers=threads, desc=f"grid {kind.value}",
                               data=data, kind=kind, seed=seed, settings=settings)

    if collector is not None:
        collector.log_grid_rows(task, list(data.ids))
        for _, _, _, folds in results:
            for held_out, standardization_rows, training_rows in folds:
                collector.log_fold(task, held_out, standardization_rows, training_rows)

    table = [GridPoint(params=p, accuracy=r[0]) for p, r in zip(points, results)]
    accuracies = [r[0] for r in results]
    best = int(np.argmax(accuracies))
    logger.info(f"Grid search {kind.value}: best {points[best]} with LOOCV accuracy {accuracies[best]:.4f}")
    _, scores, predicted, folds = results[best]
    return GridSearchResult(best=points[best], table=table, scores=scores, predicted=predicted, folds=folds)
