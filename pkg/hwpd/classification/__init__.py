from hwpd.classification.base import (
    Classifier,
    ClassifierKind,
    LabeledSet,
    check_training_set,
    classifier_class,
    load_model,
    save_model,
)
from hwpd.classification.knn import KNNClassifier
from hwpd.classification.mlp import MLPClassifier
from hwpd.classification.svm import SVMClassifier
from hwpd.classification.grid_search import (
    GridSearchResult,
    build_classifier,
    grid_points,
    grid_search_loocv,
    loocv_scores,
    score_classifier,
    train_classifier,
)

__all__ = [
    "Classifier",
    "ClassifierKind",
    "GridSearchResult",
    "KNNClassifier",
    "LabeledSet",
    "MLPClassifier",
    "SVMClassifier",
    "build_classifier",
    "check_training_set",
    "classifier_class",
    "grid_points",
    "grid_search_loocv",
    "load_model",
    "loocv_scores",
    "save_model",
    "score_classifier",
    "train_classifier",
]
