"""
Report files of an evaluation run: report.json, table.csv (tasks x
family/classifier accuracies), fusion.csv, scores/*.csv and roc/*.csv.
"""
import glob
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from hwpd import __version__
from hwpd.errors import DatasetNotFound, IoFailure, NoScores
from hwpd.evaluation.metrics import RocCurve
from hwpd.evaluation.protocol import FUSED, ProtocolRun
from hwpd.schemas import EvaluationReport, FamilyResult, Provenance, ScoreEntry, ScoreSet
from hwpd.tasks import OPTIMIZATION_TASK, TEST_TASKS
from hwpd.utils import sha256_of_text

logger = logging.getLogger(__name__)

OMITTED = "----"
SCORE_COLUMNS = ["experiment", "family", "classifier", "task", "subject_id", "label", "raw_score",
                 "normalized_score", "predicted"]
PROVENANCE_FILE = "provenance.json"


def config_hash(*models: Any) -> str:
    """sha256 over the canonical JSON dumps of the given pydantic models."""
    return sha256_of_text("\n".join(m.model_dump_json() for m in models))


def build_provenance(command: str, seed: int, config_digest: str, manifest_hash: str) -> Provenance:
    return Provenance(version=__version__, command=command, config_hash=config_digest,
                      manifest_hash=manifest_hash, seed=seed)


def write_provenance(out_dir: str, provenance: Provenance) -> str:
    path = os.path.join(out_dir, PROVENANCE_FILE)
    _write_text(path, provenance.model_dump_json(indent=2) + "\n")
    return path


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def _write_frame(frame: pd.DataFrame, path: str) -> None:
    _write_text(path, frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"))


def _stem(family: str, classifier: str, task: Optional[str]) -> str:
    return f"{family}_{classifier}_{task or FUSED}"


def accuracy_table(results: Sequence[FamilyResult]) -> pd.DataFrame:
    """Rows are the training task, the test tasks and the fused score; one column per family/classifier."""
    rows = [OPTIMIZATION_TASK.value, *(t.value for t in TEST_TASKS), FUSED]
    table = pd.DataFrame({"task": rows})
    for result in results:
        by_task = {r.task: r.accuracy for r in result.tasks}
        by_task[OPTIMIZATION_TASK.value] = result.training.accuracy
        if result.fused is not None:
            by_task[FUSED] = result.fused.accuracy
        table[f"{result.family}/{result.classifier}"] = [
            f"{by_task[t]:.4f}" if t in by_task else OMITTED for t in rows
        ]
    return table


def fusion_table(results: Sequence[FamilyResult], experiment: str) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "family": r.family,
            "classifier": r.classifier,
            experiment: None if r.fused is None else r.fused.accuracy,
            "auc": None if r.fused is None else r.fused.auc,
        }
        for r in results
    ])


def score_set_frame(score_set: ScoreSet) -> pd.DataFrame:
    return pd.DataFrame([
        [score_set.experiment, score_set.family, score_set.classifier, score_set.task or FUSED, e.subject_id,
         e.label, e.raw_score, e.normalized_score, e.predicted]
        for e in score_set.entries
    ], columns=SCORE_COLUMNS)


def write_score_set(score_set: ScoreSet, path: str) -> None:
    _write_frame(score_set_frame(score_set), path)


def write_roc(roc: RocCurve, path: str) -> None:
    _write_frame(roc.to_frame(), path)


def read_score_sets(scores_dir: str, tasks: Optional[Sequence[str]] = None) -> List[ScoreSet]:
    """
    Per-task score sets stored under ``scores_dir``; fused files are skipped.

    :param tasks: if given, only these tasks are returned
    """
    paths = sorted(glob.glob(os.path.join(scores_dir, "*.csv")))
    if not paths:
        raise DatasetNotFound(f"no score files in {scores_dir}")
    score_sets = []
    for path in paths:
        frame = pd.read_csv(path, dtype={"subject_id": str, "task": str})
        if list(frame.columns) != SCORE_COLUMNS:
            raise IoFailure(f"{path} is not a score file")
        if frame.empty:
            continue
        head = frame.iloc[0]
        task = str(head["task"])
        if task == FUSED or (tasks is not None and task not in tasks):
            continue
        entries = [
            ScoreEntry(subject_id=str(r.subject_id), label=int(r.label), raw_score=float(r.raw_score),
                       normalized_score=float(r.normalized_score), predicted=int(r.predicted))
            for r in frame.itertuples(index=False)
        ]
        score_sets.append(ScoreSet(experiment=str(head["experiment"]), task=task, family=str(head["family"]),
                                   classifier=str(head["classifier"]), entries=entries))
    if not score_sets:
        raise NoScores(f"no per-task score file in {scores_dir} matches the requested tasks")
    return score_sets


def write_report(report: EvaluationReport, run: ProtocolRun, out_dir: str) -> Dict[str, str]:
    """
    Writes every report file under ``out_dir``.

    :return: mapping of artifact name to path
    """
    scores_dir = os.path.join(out_dir, "scores")
    roc_dir = os.path.join(out_dir, "roc")
    for d in (out_dir, scores_dir, roc_dir):
        os.makedirs(d, exist_ok=True)

    paths = {
        "report": os.path.join(out_dir, "report.json"),
        "table": os.path.join(out_dir, "table.csv"),
        "fusion": os.path.join(out_dir, "fusion.csv"),
    }
    _write_text(paths["report"], report.model_dump_json(indent=2) + "\n")
    _write_frame(accuracy_table(report.results), paths["table"])
    _write_frame(fusion_table(report.results, report.experiment), paths["fusion"])
    paths["provenance"] = write_provenance(out_dir, report.provenance)

    for score_set in run.score_sets:
        write_score_set(score_set, os.path.join(
            scores_dir, _stem(score_set.family, score_set.classifier, score_set.task) + ".csv"))
    for (family, classifier, task), roc in sorted(run.rocs.items()):
        write_roc(roc, os.path.join(roc_dir, _stem(family, classifier, task) + ".csv"))

    logger.info(f"Report written to {os.path.abspath(out_dir)}")
    return paths


def read_report(path: str) -> EvaluationReport:
    if not os.path.exists(path):
        raise DatasetNotFound(f"report not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return EvaluationReport.model_validate(json.load(f))
