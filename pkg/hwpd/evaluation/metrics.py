from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import accuracy_score, auc, confusion_matrix, roc_curve

from hwpd.errors import DimensionMismatch, EmptyInput, SingleClass


def accuracy_confusion(labels: Sequence[int], predicted: Sequence[int]) -> Tuple[float, List[List[int]]]:
    """
    :return: (accuracy, confusion matrix [[TN, FP], [FN, TP]])
    """
    labels = np.asarray(labels, dtype=int)
    predicted = np.asarray(predicted, dtype=int)
    if len(labels) != len(predicted):
        raise DimensionMismatch(f"{len(labels)} labels but {len(predicted)} predictions")
    if len(labels) == 0:
        raise EmptyInput("accuracy of an empty label set")
    confusion = confusion_matrix(labels, predicted, labels=[0, 1])
    return float(accuracy_score(labels, predicted)), confusion.astype(int).tolist()


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"threshold": self.thresholds, "fpr": self.fpr, "tpr": self.tpr})

    def points(self) -> List[List[float]]:
        return [[float(f), float(t)] for f, t in zip(self.fpr, self.tpr)]


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> RocCurve:
    """
    ROC points over every distinct score, highest threshold first; tied scores
    form one diagonal segment. AUC by the trapezoid rule.
    """
    labels = np.asarray(labels, dtype=int)
    scores = np.asarray(scores, dtype=float)
    if len(labels) != len(scores):
        raise DimensionMismatch(f"{len(labels)} labels but {len(scores)} scores")
    if len(np.unique(labels)) < 2:
        raise SingleClass("ROC needs both classes among the labels")
    fpr, tpr, thresholds = roc_curve(labels, scores, drop_intermediate=False)
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr, auc=float(auc(fpr, tpr)))
