from typing import Any, Dict

import numpy as np
from sklearn.metrics.pairwise import euclidean_distances

from hwpd.classification.base import Classifier, ClassifierKind


class KNNClassifier(Classifier):
    """
    K nearest neighbours on Euclidean distance. Distance ties go to the lower
    training row index; the score is the fraction of class-1 neighbours, so a
    tied vote is class 0.
    """
    kind = ClassifierKind.KNN

    def __init__(self, k: int = 3, seed: int = 0):
        super().__init__(seed=seed)
        self.k = k

    def _fit(self, rows: np.ndarray, labels: np.ndarray) -> None:
        self.rows_ = rows.copy()
        self.labels_ = labels.copy()

    def neighbours(self, rows: np.ndarray) -> np.ndarray:
        """Indices of the K nearest training rows of every query, nearest first."""
        k = min(self.k, len(self.labels_))
        dist = euclidean_distances(rows, self.rows_)
        index = np.arange(len(self.labels_))
        return np.array([np.lexsort((index, d))[:k] for d in dist])

    def _decision(self, rows: np.ndarray) -> np.ndarray:
        nn = self.neighbours(rows)
        return self.labels_[nn].sum(axis=1) / nn.shape[1]

    def meta_params(self) -> Dict[str, Any]:
        return {"k": self.k}

    def get_state(self) -> Dict[str, Any]:
        return {"rows": self.rows_.tolist(), "labels": self.labels_.tolist()}

    def set_state(self, state: Dict[str, Any]) -> None:
        self.rows_ = np.asarray(state["rows"], dtype=float)
        self.labels_ = np.asarray(state["labels"], dtype=int)
        self.n_features_ = self.rows_.shape[1]
