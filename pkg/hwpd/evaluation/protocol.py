"""
The evaluation protocol: meta-parameters selected by leave-one-out grid
search on the Circle task, every other task scored by subject-level
leave-one-out with those parameters, per-task scores fused by the mean rule.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from hwpd.classification.base import ClassifierKind, LabeledSet
from hwpd.classification.grid_search import FoldRecord, MIN_GRID_ROWS, grid_search_loocv, loocv_scores
from hwpd.config import Settings
from hwpd.errors import EmptyInput, MissingTask
from hwpd.evaluation.fusion import fuse_scores_mean, normalize_score
from hwpd.evaluation.metrics import RocCurve, accuracy_confusion, roc_auc
from hwpd.evaluation.provenance import ProvenanceCollector
from hwpd.features.assembly import ID_COLUMNS
from hwpd.features.manifest import FAMILIES, FeatureManifest
from hwpd.schemas import FamilyResult, GridSpec, ScoreEntry, ScoreSet, TaskResult
from hwpd.tasks import NEUROMOTOR_SKIP_TASKS, OPTIMIZATION_TASK, TEST_TASKS, Experiment, Group, TaskId
from hwpd.utils import log_exec_timer, parallel_map

logger = logging.getLogger(__name__)

FAMILY_CHOICES = (*FAMILIES, "all")
FUSED = "fused"


@dataclass
class ProtocolRun:
    results: List[FamilyResult]
    score_sets: List[ScoreSet]
    # keyed by (family, classifier, task or "fused")
    rocs: Dict[Tuple[str, str, str], RocCurve] = field(default_factory=dict)
    incomplete_subjects: List[str] = field(default_factory=list)


def experiment_frame(frame: pd.DataFrame, experiment: Experiment) -> pd.DataFrame:
    """Rows of the two groups of an experiment with a ``label`` column, ordered by subject and task."""
    experiment = Experiment(experiment)
    groups = [g.value for g in experiment.groups]
    selected = frame[frame["group"].isin(groups)].copy()
    selected["label"] = [experiment.label_of(Group(g)) for g in selected["group"]]
    return selected.sort_values(["subject_id", "task"], kind="mergesort").reset_index(drop=True)


def task_dataset(frame: pd.DataFrame, task: TaskId, columns: Sequence[str]) -> LabeledSet:
    rows = frame[frame["task"] == TaskId(task).value]
    return LabeledSet(rows[list(columns)].to_numpy(dtype=float), rows["label"].to_numpy(dtype=int),
                      rows["subject_id"].astype(str).tolist())


def _task_loocv(item: Tuple[TaskId, LabeledSet], kind: ClassifierKind, params: Dict, seed: int,
                settings: Settings) -> Tuple[np.ndarray, np.ndarray, List[FoldRecord]]:
    _, data = item
    return loocv_scores(data, kind, params, seed, settings)


def _score_set(experiment: Experiment, task: Optional[TaskId], family: str, kind: ClassifierKind,
               data: LabeledSet, scores: np.ndarray, predicted: np.ndarray) -> ScoreSet:
    entries = [
        ScoreEntry(subject_id=s, label=int(y), raw_score=float(r), normalized_score=normalize_score(kind, r),
                   predicted=int(p))
        for s, y, r, p in zip(data.ids, data.labels, scores, predicted)
    ]
    return ScoreSet(experiment=experiment.value, task=None if task is None else task.value, family=family,
                    classifier=kind.value, entries=entries)


def _task_result(name: str, score_set: ScoreSet, training_only: bool = False) -> Tuple[TaskResult, Optional[RocCurve]]:
    accuracy, confusion = accuracy_confusion(score_set.labels, score_set.predicted)
    roc = roc_auc(score_set.labels, score_set.scores) if len(set(score_set.labels)) == 2 else None
    result = TaskResult(task=name, accuracy=accuracy, confusion=confusion, auc=None if roc is None else roc.auc,
                        n_subjects=len(score_set.entries), training_only=training_only)
    return result, roc


def _evaluable(data: LabeledSet) -> bool:
    counts = np.bincount(data.labels, minlength=2)
    return len(data) >= MIN_GRID_ROWS and counts.min() >= 2


def evaluate_family(frame: pd.DataFrame, manifest: FeatureManifest, experiment: Experiment, family: str,
                    kind: ClassifierKind, grid: GridSpec, seed: int = 0, settings: Optional[Settings] = None,
                    threads: int = 1, collector: Optional[ProvenanceCollector] = None
                    ) -> Tuple[FamilyResult, List[ScoreSet], Dict[Tuple[str, str, str], RocCurve]]:
    """One feature family with one classifier over an experiment frame."""
    settings = settings or Settings()
    kind = ClassifierKind(kind)
    columns = [manifest.names[i] for i in manifest.family_indices(family)]
    if not columns:
        raise EmptyInput(f"the feature manifest holds no {family} feature")

    circle = task_dataset(frame, OPTIMIZATION_TASK, columns)
    search = grid_search_loocv(circle, kind, grid, seed, settings, threads, collector, OPTIMIZATION_TASK.value)
    circle_scores = _score_set(experiment, OPTIMIZATION_TASK, family, kind, circle, search.scores, search.predicted)
    training, circle_roc = _task_result(OPTIMIZATION_TASK.value, circle_scores, training_only=True)

    omitted, items = [], []
    for task in TEST_TASKS:
        if family == "neuromotor" and task in NEUROMOTOR_SKIP_TASKS:
            omitted.append(task.value)
            continue
        data = task_dataset(frame, task, columns)
        if not _evaluable(data):
            logger.warning(f"{family}/{kind.value}: task {task.value} has too few subjects per class, omitted")
            omitted.append(task.value)
            continue
        items.append((task, data))

    outputs = parallel_map(_task_loocv, items, n_workers=threads, desc=f"tasks {family}/{kind.value}",
                           kind=kind, params=search.best, seed=seed, settings=settings)

    rocs: Dict[Tuple[str, str, str], RocCurve] = dict()
    if circle_roc is not None:
        rocs[(family, kind.value, OPTIMIZATION_TASK.value)] = circle_roc
    score_sets, task_results = [], []
    for (task, data), (scores, predicted, folds) in zip(items, outputs):
        if collector is not None:
            for held_out, standardization_rows, training_rows in folds:
                collector.log_fold(task.value, held_out, standardization_rows, training_rows)
        score_set = _score_set(experiment, task, family, kind, data, scores, predicted)
        result, roc = _task_result(task.value, score_set)
        score_sets.append(score_set)
        task_results.append(result)
        if roc is not None:
            rocs[(family, kind.value, task.value)] = roc

    fused_result, fused_points = None, []
    if score_sets:
        fused_set = fuse_scores_mean(score_sets)
        fused_result, fused_roc = _task_result(FUSED, fused_set)
        if fused_roc is not None:
            rocs[(family, kind.value, FUSED)] = fused_roc
            fused_points = fused_roc.points()
        score_sets.append(fused_set)

    result = FamilyResult(family=family, classifier=kind.value, selected_params=search.best, training=training,
                          grid=search.table, tasks=task_results, omitted_tasks=omitted, fused=fused_result,
                          fused_roc=fused_points)
    return result, [circle_scores, *score_sets], rocs


def run_protocol(frame: pd.DataFrame, manifest: FeatureManifest, experiment: Experiment,
                 families: Sequence[str] = ("all",), classifiers: Sequence[ClassifierKind] = (ClassifierKind.SVM,),
                 grid: Optional[GridSpec] = None, seed: int = 0, settings: Optional[Settings] = None,
                 threads: int = 1, collector: Optional[ProvenanceCollector] = None) -> ProtocolRun:
    """
    :param frame: a feature matrix (id columns followed by the manifest columns)
    :raises MissingTask: a subject of the experiment has no Circle vector
    """
    experiment = Experiment(experiment)
    grid = grid or GridSpec()
    settings = settings or Settings()
    for family in families:
        if family not in FAMILY_CHOICES:
            raise ValueError(f"Unknown feature family '{family}'. Available: {list(FAMILY_CHOICES)}")

    data = experiment_frame(frame[ID_COLUMNS + manifest.names], experiment)
    subjects = sorted(set(data["subject_id"].astype(str)))
    with_circle = set(data.loc[data["task"] == OPTIMIZATION_TASK.value, "subject_id"].astype(str))
    lacking = [s for s in subjects if s not in with_circle]
    if lacking:
        raise MissingTask(f"{len(lacking)} subjects lack the {OPTIMIZATION_TASK.value} task, e.g. {lacking[:5]}")

    task_counts = data.groupby("subject_id")["task"].nunique()
    incomplete = sorted(str(s) for s, n in task_counts.items() if n < len(TEST_TASKS) + 1)
    if incomplete:
        logger.warning(f"{len(incomplete)} subjects miss some tasks; fusion averages their available tasks")

    run = ProtocolRun(results=[], score_sets=[], incomplete_subjects=incomplete)
    for family in families:
        for kind in classifiers:
            with log_exec_timer(f"protocol {experiment.value} {family}/{ClassifierKind(kind).value}"):
                result, score_sets, rocs = evaluate_family(data, manifest, experiment, family, kind, grid, seed,
                                                           settings, threads, collector)
            run.results.append(result)
            run.score_sets.extend(score_sets)
            run.rocs.update(rocs)
            if result.fused is not None:
                logger.info(f"{experiment.value} {family}/{result.classifier}: fused accuracy "
                            f"{result.fused.accuracy:.4f} over {len(result.tasks)} tasks")
    return run
