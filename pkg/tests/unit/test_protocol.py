import os
import tempfile

import numpy as np
import pandas as pd
import pytest

from hwpd.classification import ClassifierKind
from hwpd.errors import MissingTask, NoScores
from hwpd.evaluation.provenance import LeakageAuditor, audit_provenance
from hwpd.evaluation.protocol import FUSED, experiment_frame, run_protocol, task_dataset
from hwpd.evaluation.report import (
    OMITTED, SCORE_COLUMNS, accuracy_table, build_provenance, config_hash, read_report, read_score_sets,
    write_report
)
from hwpd.features.assembly import build_feature_matrix
from hwpd.features.manifest import FeatureManifest, FeatureSpec, build_manifest
from hwpd.schemas import EvaluationReport, GridSpec
from hwpd.signals.recording import read_dataset_manifest
from hwpd.synth import CohortConfig, synth_cohort
from hwpd.tasks import ALL_TASKS, NEUROMOTOR_SKIP_TASKS, Experiment, Group, TaskId

MANIFEST = FeatureManifest([
    FeatureSpec(0, "kin.speed_mean", "task", "mm/s", "kin.speed_mean"),
    FeatureSpec(1, "nl.speed.hurst", "task", "1", "nl.speed.hurst"),
    FeatureSpec(2, "nm.count_mean", "stroke", "1", "nm.count_mean"),
])
GRID = GridSpec(knn_k=[3])


def _frame(n_per_group=5, groups=(Group.YHC, Group.PD, Group.EHC), tasks=ALL_TASKS, seed=0):
    """PD rows sit 4 units above the healthy groups on every feature."""
    rng = np.random.default_rng(seed)
    records = []
    for group in groups:
        shift = 4.0 if group is Group.PD else 0.0
        for i in range(n_per_group):
            for task in tasks:
                values = rng.normal(shift, 0.5, size=len(MANIFEST))
                if task in NEUROMOTOR_SKIP_TASKS:
                    values[2] = np.nan
                records.append([f"{group.value}{i:02d}", group.value, task.value, *values])
    return pd.DataFrame(records, columns=["subject_id", "group", "task", *MANIFEST.names])


def test_experiment_frame():
    data = experiment_frame(_frame(2), Experiment.EHCvsPD)

    assert set(data["group"]) == {"EHC", "PD"}
    assert data.loc[data["group"] == "PD", "label"].eq(1).all()
    assert data.loc[data["group"] == "EHC", "label"].eq(0).all()
    assert data["subject_id"].is_monotonic_increasing


def test_task_dataset():
    data = task_dataset(experiment_frame(_frame(3), Experiment.YHCvsPD), TaskId.Cube, MANIFEST.names[:2])
    assert data.rows.shape == (6, 2)
    assert sorted(data.ids) == ["PD00", "PD01", "PD02", "YHC00", "YHC01", "YHC02"]


def test_separable_cohort():
    auditor = LeakageAuditor()
    run = run_protocol(_frame(), MANIFEST, Experiment.YHCvsPD, families=("all",),
                       classifiers=(ClassifierKind.KNN,), grid=GRID, collector=auditor)

    (result,) = run.results
    assert result.selected_params == {"k": 3}
    assert result.training.training_only and result.training.task == "Circle"
    assert len(result.tasks) == 16 and result.omitted_tasks == []
    assert all(r.accuracy == 1.0 and r.auc == 1.0 for r in result.tasks)
    assert result.fused.accuracy == 1.0
    assert result.fused_roc[0] == [0.0, 0.0]

    assert len(run.score_sets) == 1 + 16 + 1
    assert run.score_sets[-1].task is None
    assert ("all", "knn", FUSED) in run.rocs
    assert run.incomplete_subjects == []
    assert audit_provenance(auditor) == {"folds": 10 + 10 * 16, "grid_rows": 10, "leaks": 0}


def test_neuromotor_skips_free_form_tasks():
    run = run_protocol(_frame(), MANIFEST, Experiment.YHCvsPD, families=("neuromotor", "kinematic"),
                       classifiers=("knn",), grid=GRID)

    neuromotor, kinematic = run.results
    assert sorted(neuromotor.omitted_tasks) == ["Alphabet", "FreeWriting", "Rey"]
    assert len(neuromotor.tasks) == 13
    assert kinematic.omitted_tasks == []

    table = accuracy_table(run.results)
    assert list(table.columns) == ["task", "neuromotor/knn", "kinematic/knn"]
    assert list(table["task"])[0] == "Circle" and list(table["task"])[-1] == FUSED
    rey = table.loc[table["task"] == "Rey"].iloc[0]
    assert rey["neuromotor/knn"] == OMITTED
    assert rey["kinematic/knn"] == "1.0000"


def test_tasks_with_too_few_subjects_are_omitted(caplog):
    frame = _frame()
    frame = frame[~((frame["task"] == "Spiral") & (frame["group"] == "PD") & (frame["subject_id"] != "PD00"))]
    run = run_protocol(frame, MANIFEST, Experiment.YHCvsPD, classifiers=("knn",), grid=GRID)

    assert run.results[0].omitted_tasks == ["Spiral"]
    assert "too few subjects" in caplog.text
    assert run.incomplete_subjects == ["PD01", "PD02", "PD03", "PD04"]


def test_missing_circle():
    frame = _frame()
    frame = frame[~((frame["task"] == "Circle") & (frame["subject_id"] == "YHC01"))]
    with pytest.raises(MissingTask):
        run_protocol(frame, MANIFEST, Experiment.YHCvsPD, classifiers=("knn",), grid=GRID)


def test_unknown_family():
    with pytest.raises(ValueError):
        run_protocol(_frame(), MANIFEST, Experiment.YHCvsPD, families=("spectral",), grid=GRID)


def test_protocol_is_deterministic():
    first = run_protocol(_frame(seed=3), MANIFEST, Experiment.EHCvsPD, classifiers=("svm",),
                         grid=GridSpec(svm_c=[1, 10], svm_gamma=[0.1]), seed=7)
    second = run_protocol(_frame(seed=3), MANIFEST, Experiment.EHCvsPD, classifiers=("svm",),
                          grid=GridSpec(svm_c=[1, 10], svm_gamma=[0.1]), seed=7)
    assert first.results == second.results
    assert [s.scores for s in first.score_sets] == [s.scores for s in second.score_sets]


def test_report_files():
    run = run_protocol(_frame(), MANIFEST, Experiment.YHCvsPD, families=("kinematic",), classifiers=("knn",),
                       grid=GRID)
    provenance = build_provenance("evaluate", 0, config_hash(GRID), MANIFEST.content_hash())
    report = EvaluationReport(provenance=provenance, experiment="yhc-vs-pd", results=run.results)

    with tempfile.TemporaryDirectory(prefix="hwpd_report_") as tmp:
        paths = write_report(report, run, tmp)
        assert set(paths) == {"report", "table", "fusion", "provenance"}
        assert read_report(paths["report"]) == report

        scores_dir = os.path.join(tmp, "scores")
        assert os.path.exists(os.path.join(scores_dir, "kinematic_knn_fused.csv"))
        assert os.path.exists(os.path.join(tmp, "roc", "kinematic_knn_Cube.csv"))
        cube = pd.read_csv(os.path.join(scores_dir, "kinematic_knn_Cube.csv"))
        assert list(cube.columns) == SCORE_COLUMNS and len(cube) == 10

        score_sets = read_score_sets(scores_dir)
        assert len(score_sets) == 17
        assert all(s.task != FUSED for s in score_sets)
        assert [s.task for s in read_score_sets(scores_dir, tasks=["Cube", "House"])] == ["Cube", "House"]
        with pytest.raises(NoScores):
            read_score_sets(scores_dir, tasks=["Nowhere"])

        fusion = pd.read_csv(paths["fusion"])
        assert list(fusion.columns) == ["family", "classifier", "yhc-vs-pd", "auc"]


@pytest.mark.slow
def test_synthetic_cohort_end_to_end():
    """All features of all tasks, SVM, young controls against PD"""
    with tempfile.TemporaryDirectory(prefix="hwpd_protocol_") as tmp:
        synth_cohort(CohortConfig(counts={Group.PD: 12, Group.EHC: 0, Group.YHC: 12}), seed=11, out_dir=tmp)
        dataset = read_dataset_manifest(os.path.join(tmp, "manifest.csv"))
        manifest = build_manifest()
        frame, skipped = build_feature_matrix(dataset, manifest, threads=4)

    assert skipped == []
    run = run_protocol(frame, manifest, Experiment.YHCvsPD, families=("all",), classifiers=(ClassifierKind.SVM,),
                       seed=1)
    result = run.results[0]
    assert len(result.tasks) == len(ALL_TASKS) - 1
    assert result.fused.accuracy >= 0.9
    assert result.fused.accuracy >= max(t.accuracy for t in result.tasks) - 0.05
