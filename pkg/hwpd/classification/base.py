import json
import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from hwpd.errors import DatasetNotFound, DimensionMismatch, NonFiniteFeature, SingleClass
from hwpd.schemas import MODEL_FORMAT_VERSION, ModelFile

logger = logging.getLogger(__name__)


class ClassifierKind(str, Enum):
    KNN = "knn"
    SVM = "svm"
    MLP = "mlp"


@dataclass
class LabeledSet:
    """Standardized rows with binary labels (1 = positive class); ``ids`` name the subjects of the rows."""
    rows: np.ndarray
    labels: np.ndarray
    ids: Optional[List[str]] = None

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).ravel()
        if len(self.rows) != len(self.labels):
            raise DimensionMismatch(f"{len(self.rows)} rows but {len(self.labels)} labels")
        if self.ids is not None and len(self.ids) != len(self.labels):
            raise DimensionMismatch(f"{len(self.ids)} ids for {len(self.labels)} rows")

    def __len__(self) -> int:
        return len(self.labels)

    def without(self, i: int) -> Tuple["LabeledSet", np.ndarray, int]:
        """Leave-one-out split: (the other rows, the held-out row, its label)."""
        keep = np.arange(len(self)) != i
        ids = None if self.ids is None else [s for j, s in enumerate(self.ids) if j != i]
        return LabeledSet(self.rows[keep], self.labels[keep], ids), self.rows[i], int(self.labels[i])


def check_training_set(rows: np.ndarray, labels: np.ndarray) -> None:
    if not np.all(np.isfinite(rows)):
        raise NonFiniteFeature("training rows contain NaN or infinite values")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise SingleClass(f"training labels contain a single class: {classes.tolist()}")
    if not set(classes.tolist()) <= {0, 1}:
        raise ValueError(f"labels must be 0 or 1, got {classes.tolist()}")


class Classifier(BaseEstimator):
    """
    Binary classifier with a raw decision score. Subclasses implement
    ``_fit``, ``_decision`` and the state round-trip for model files.
    """
    kind: ClassifierKind
    # a score strictly above the threshold is class 1
    threshold: float = 0.5

    _registry: Dict[ClassifierKind, type] = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        Classifier._registry[cls.kind] = cls

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.n_features_: Optional[int] = None
        self.converged_: bool = True
        # subjects of the rows the last fit consumed
        self.trained_on_: List[str] = []

    def fit(self, rows, labels, ids: Optional[Sequence[str]] = None) -> "Classifier":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        labels = np.asarray(labels, dtype=int).ravel()
        check_training_set(rows, labels)
        self.n_features_ = rows.shape[1]
        self.trained_on_ = [str(s) for s in ids] if ids is not None else [str(i) for i in range(len(rows))]
        self._fit(rows, labels)
        return self

    def decision_function(self, rows) -> np.ndarray:
        self._check_if_fitted()
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != self.n_features_:
            raise DimensionMismatch(f"model expects {self.n_features_} features, got {rows.shape[1]}")
        if not np.all(np.isfinite(rows)):
            raise NonFiniteFeature("scored rows contain NaN or infinite values")
        return self._decision(rows)

    def predict(self, rows) -> np.ndarray:
        return (self.decision_function(rows) > self.threshold).astype(int)

    def score_one(self, x) -> Tuple[float, int]:
        score = float(self.decision_function(np.asarray(x, dtype=float).reshape(1, -1))[0])
        return score, int(score > self.threshold)

    def _fit(self, rows: np.ndarray, labels: np.ndarray) -> None:
        raise NotImplementedError()

    def _decision(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError()

    def meta_params(self) -> Dict[str, Any]:
        """The grid-searched parameters."""
        raise NotImplementedError()

    def get_state(self) -> Dict[str, Any]:
        raise NotImplementedError()

    def set_state(self, state: Dict[str, Any]) -> None:
        raise NotImplementedError()

    def _check_if_fitted(self):
        if self.n_features_ is None:
            raise RuntimeError("The model is not fitted")

    def to_model_file(self, **metadata) -> ModelFile:
        self._check_if_fitted()
        return ModelFile(
            kind=self.kind.value,
            params=self.get_params(),
            state=self.get_state(),
            seed=self.seed,
            converged=self.converged_,
            **metadata,
        )

    def save(self, path: str, overwrite: bool = True, **metadata) -> None:
        """
        Saves the model as versioned JSON.

        :param path: a file path
        :param overwrite: if False and the path exists, raises
        :param metadata: extra ModelFile fields (features, manifest_hash, task, experiment, standardization)
        """
        if os.path.exists(path) and not overwrite:
            raise RuntimeError(f"The path already exists and is not allowed to overwrite: {path}")
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_model_file(**metadata).model_dump_json(indent=2))

    @classmethod
    def from_model_file(cls, model_file: ModelFile) -> "Classifier":
        if model_file.format_version != MODEL_FORMAT_VERSION:
            raise ValueError(f"Unsupported model format version {model_file.format_version}")
        model = classifier_class(ClassifierKind(model_file.kind))(**model_file.params)
        model.set_state(model_file.state)
        model.converged_ = model_file.converged
        return model


def save_model(model: Classifier, path: str, **metadata) -> None:
    model.save(path, **metadata)


def load_model(path: str) -> Tuple[Classifier, ModelFile]:
    """Loads a model JSON; returns the classifier and the full file with its metadata."""
    if not os.path.exists(path):
        raise DatasetNotFound(f"model file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        model_file = ModelFile.model_validate(json.load(f))
    return Classifier.from_model_file(model_file), model_file


def classifier_class(kind: ClassifierKind) -> type:
    return Classifier._registry[ClassifierKind(kind)]
