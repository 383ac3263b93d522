"""
Per-task feature vectors aligned to a manifest, and the feature matrix file.
"""
import logging
import os
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from hwpd.config import Settings
from hwpd.errors import DatasetNotFound, HwpdError, ManifestMismatch
from hwpd.features.functionals import functionals
from hwpd.features.kinematic import STROKE_QUANTITY_UNITS, global_kinematic_features, stroke_feature_name, \
    stroke_kinematic_series
from hwpd.features.manifest import FeatureManifest, feature_registry
from hwpd.features.neuromotor import fit_strokes, task_neuromotor_features, write_fit_dump
from hwpd.features.nonlinear import nonlinear_features
from hwpd.signals.preprocessing import preprocess
from hwpd.signals.recording import TaskRecording, parse_recording
from hwpd.signals.strokes import Stroke, segment_strokes
from hwpd.tasks import Group, TaskId
from hwpd.utils import parallel_map

logger = logging.getLogger(__name__)

ID_COLUMNS = ["subject_id", "group", "task"]

FeatureSet = Dict[str, Optional[float]]


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Manifest-aligned values of one task; absent entries are NaN."""
    subject_id: str
    group: Group
    task: TaskId
    values: np.ndarray

    @property
    def mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def __len__(self) -> int:
        return len(self.values)


def stroke_functional_features(strokes: Sequence[Stroke], prominence: float = 0.05,
                               include_range: bool = False) -> FeatureSet:
    """Functionals across strokes of every per-stroke quantity: ``kin.stroke.<quantity>.<functional>``."""
    per_stroke = [stroke_kinematic_series(s, prominence) for s in strokes]
    features: FeatureSet = OrderedDict()
    for quantity in STROKE_QUANTITY_UNITS:
        summary = functionals([row[quantity] for row in per_stroke], include_range=include_range)
        for functional, value in summary.as_dict().items():
            features[stroke_feature_name(quantity, functional)] = value
    return features


def assemble_task_vector(rec: TaskRecording, strokes: Sequence[Stroke], kinematic: FeatureSet,
                         nonlinear: FeatureSet, neuromotor: FeatureSet, manifest: FeatureManifest,
                         settings: Optional[Settings] = None) -> FeatureVector:
    """
    Places the task-level kinematic set, the functionals of the per-stroke
    quantities and the nonlinear and neuromotor sets into manifest slots.

    :raises ManifestMismatch: a produced name is unknown to the registry, or the
        manifest references a formula nothing produced
    """
    settings = settings or Settings()
    produced: FeatureSet = OrderedDict()
    produced.update(kinematic)
    produced.update(stroke_functional_features(strokes, settings.kinematic.peak_prominence,
                                               settings.functionals.include_range))
    produced.update(nonlinear)
    produced.update(neuromotor)

    registry = feature_registry(settings)
    unknown = [k for k in produced if k not in registry]
    if unknown:
        raise ManifestMismatch(f"producers emitted names unknown to the registry: {unknown[:5]}")
    missing = [fid for fid in manifest.formula_ids if fid not in produced]
    if missing:
        raise ManifestMismatch(f"manifest references formula ids nothing produced: {missing[:5]}")

    values = np.full(len(manifest), np.nan)
    for spec in manifest:
        value = produced[spec.formula_id]
        if value is None:
            continue
        if not np.isfinite(value):
            logger.warning(f"{rec.subject_id}/{rec.task.value}: {spec.name} is not finite, recorded as absent")
            continue
        values[spec.index] = value
    return FeatureVector(subject_id=rec.subject_id, group=rec.group, task=rec.task, values=values)


def extract_task_vector(rec: TaskRecording, manifest: FeatureManifest, settings: Optional[Settings] = None,
                        dump_dir: Optional[str] = None) -> FeatureVector:
    """
    The whole feature chain of one recording: preprocessing, stroke segmentation,
    the three families, assembly.

    :param dump_dir: if set, lognormal fits are written there, one CSV per stroke
    """
    settings = settings or Settings()
    pre = settings.preprocessing
    clean = preprocess(rec, pre.target_rate, pre.cutoff, pre.filter_order)
    strokes = segment_strokes(clean, pre.min_stroke_samples)

    kinematic = global_kinematic_features(clean, strokes, settings.kinematic)
    nonlinear = nonlinear_features(strokes, pre.target_rate, settings.nonlinear)
    fits = fit_strokes(strokes, settings.neuromotor)
    neuromotor = task_neuromotor_features(rec.task, strokes, settings.neuromotor, fits=fits)

    if dump_dir is not None:
        os.makedirs(dump_dir, exist_ok=True)
        for stroke, fit in fits:
            write_fit_dump(fit, stroke, os.path.join(
                dump_dir, f"{rec.subject_id}_{rec.task.value}_stroke{stroke.index:03d}.csv"))

    return assemble_task_vector(clean, strokes, kinematic, nonlinear, neuromotor, manifest, settings)


def _vector_from_row(row: Dict[str, str], manifest: FeatureManifest, settings: Settings,
                     dump_dir: Optional[str]) -> Tuple[Optional[FeatureVector], Optional[str]]:
    try:
        rec = parse_recording(row["file_path"], row["subject_id"], Group(row["group"]), TaskId(row["task"]))
        return extract_task_vector(rec, manifest, settings, dump_dir), None
    except DatasetNotFound:
        raise
    except HwpdError as e:
        logger.warning(f"{row['subject_id']}/{row['task']} skipped: {type(e).__name__}: {e}")
        return None, f"{type(e).__name__}: {e}"


def build_feature_matrix(dataset: pd.DataFrame, manifest: FeatureManifest, settings: Optional[Settings] = None,
                         threads: int = 1, dump_dir: Optional[str] = None
                         ) -> Tuple[pd.DataFrame, List[Dict[str, str]]]:
    """
    Feature vectors of every recording of a dataset manifest.

    :return: (feature matrix with id columns, list of skipped recordings with the reason)
    """
    settings = settings or Settings()
    rows = dataset[["subject_id", "group", "task", "file_path"]].astype(str).to_dict("records")
    results = parallel_map(_vector_from_row, rows, n_workers=threads, desc="features",
                           manifest=manifest, settings=settings, dump_dir=dump_dir)

    vectors, skipped = [], []
    for row, (vector, reason) in zip(rows, results):
        if vector is None:
            skipped.append({"subject_id": row["subject_id"], "task": row["task"], "reason": reason})
        else:
            vectors.append(vector)
    logger.info(f"Extracted {len(vectors)} feature vectors, skipped {len(skipped)} recordings")
    return vectors_to_frame(vectors, manifest), skipped


def vectors_to_frame(vectors: Sequence[FeatureVector], manifest: FeatureManifest) -> pd.DataFrame:
    ids = pd.DataFrame(
        [[v.subject_id, v.group.value, v.task.value] for v in vectors], columns=ID_COLUMNS
    )
    values = pd.DataFrame(
        np.vstack([v.values for v in vectors]) if vectors else np.empty((0, len(manifest))),
        columns=manifest.names,
    )
    return pd.concat([ids, values], axis=1)


def write_feature_matrix(frame: pd.DataFrame, path: str) -> None:
    """Feature matrix CSV; absent entries are empty strings."""
    frame.to_csv(path, index=False, na_rep="", float_format="%.17g", lineterminator="\n")


def read_feature_matrix(path: str, manifest: Optional[FeatureManifest] = None) -> pd.DataFrame:
    """
    Reads a feature matrix; empty cells become NaN. With a manifest, the feature
    columns must be exactly the manifest names in manifest order.
    """
    if not os.path.exists(path):
        raise DatasetNotFound(f"feature matrix not found: {path}")
    frame = pd.read_csv(path, dtype={"subject_id": str, "group": str, "task": str})
    missing = [c for c in ID_COLUMNS if c not in frame.columns]
    if missing:
        raise ManifestMismatch(f"feature matrix {path} lacks columns {missing}")
    if manifest is not None and list(frame.columns[len(ID_COLUMNS):]) != manifest.names:
        raise ManifestMismatch(f"feature matrix {path} columns do not follow the feature manifest")
    return frame


def frame_vectors(frame: pd.DataFrame) -> List[FeatureVector]:
    values = frame.iloc[:, len(ID_COLUMNS):].to_numpy(dtype=float)
    return [
        FeatureVector(subject_id=str(s), group=Group(g), task=TaskId(t), values=values[i])
        for i, (s, g, t) in enumerate(frame[ID_COLUMNS].itertuples(index=False, name=None))
    ]
