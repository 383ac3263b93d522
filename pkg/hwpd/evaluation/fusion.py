"""
Late fusion of per-task scores by the mean rule.
"""
import logging
import math
from collections import OrderedDict
from typing import Dict, List, Sequence

import numpy as np
from scipy.special import expit

from hwpd.classification.base import ClassifierKind
from hwpd.errors import NoScores
from hwpd.schemas import ScoreEntry, ScoreSet

logger = logging.getLogger(__name__)

FUSED_THRESHOLD = 0.5


def normalize_score(kind: ClassifierKind, raw: float) -> float:
    """SVM decision values are squashed by the logistic function; KNN and MLP scores already lie in [0, 1]."""
    if ClassifierKind(kind) is ClassifierKind.SVM:
        return float(expit(raw))
    return float(np.clip(raw, 0.0, 1.0))


def normalize_scores(kind: ClassifierKind, raw: Sequence[float]) -> List[float]:
    return [normalize_score(kind, r) for r in raw]


def fuse_scores_mean(score_sets: Sequence[ScoreSet]) -> ScoreSet:
    """
    Mean of every subject's available normalized scores; the fused label is 1
    iff the mean is at least 0.5. Subjects are ordered by id.
    """
    if not score_sets:
        raise NoScores("no score sets to fuse")
    tasks = [s.task for s in score_sets]
    if len(set(tasks)) != len(tasks):
        raise ValueError(f"a task occurs more than once among the fused score sets: {tasks}")

    per_subject: Dict[str, List[float]] = OrderedDict()
    labels: Dict[str, int] = dict()
    for score_set in score_sets:
        for entry in score_set.entries:
            per_subject.setdefault(entry.subject_id, []).append(entry.normalized_score)
            labels.setdefault(entry.subject_id, entry.label)
    if not per_subject:
        raise NoScores("the fused score sets hold no subject")

    entries = []
    for subject in sorted(per_subject):
        values = per_subject[subject]
        fused = math.fsum(values) / len(values)
        entries.append(ScoreEntry(subject_id=subject, label=labels[subject], raw_score=fused,
                                  normalized_score=fused, predicted=int(fused >= FUSED_THRESHOLD)))
    first = score_sets[0]
    logger.debug(f"Fused {len(score_sets)} tasks into {len(entries)} subject scores")
    return ScoreSet(experiment=first.experiment, task=None, family=first.family, classifier=first.classifier,
                    entries=entries)
