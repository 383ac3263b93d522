"""
Synthetic cohorts: per-group pathology ranges, demographics of the clinical
cohort the groups mimic, and the files of every subject and task.
"""
import json
import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, field_validator

from hwpd.config import read_structured_file
from hwpd.errors import IoFailure
from hwpd.signals.recording import DEFAULT_SAMPLE_RATE, MANIFEST_COLUMNS, write_recording
from hwpd.synth.distributions import ClippedNormal, FloatRangeDistribution
from hwpd.synth.generator import MIN_PEN_DOWN_S, GroundTruth, SubjectProfile, synth_task
from hwpd.tasks import ALL_TASKS, Group, TaskId
from hwpd.utils import log_exec_timer, parallel_map

logger = logging.getLogger(__name__)

DEFAULT_COUNTS = {Group.PD: 55, Group.EHC: 49, Group.YHC: 45}
MALE_COUNTS = {Group.PD: 20, Group.EHC: 27, Group.YHC: 27}
# (mean, std, min, max) of age per group and sex
AGE_TABLE = {
    (Group.PD, "M"): (64.0, 10.3, 41.0, 80.0),
    (Group.PD, "F"): (58.0, 12.9, 29.0, 83.0),
    (Group.EHC, "M"): (66.0, 11.1, 49.0, 85.0),
    (Group.EHC, "F"): (59.0, 10.6, 43.0, 83.0),
    (Group.YHC, "M"): (25.0, 4.93, 17.0, 42.0),
    (Group.YHC, "F"): (23.0, 3.9, 19.0, 32.0),
}
MAX_GAP = 3.0


def _r(low: float, high: float) -> FloatRangeDistribution:
    return FloatRangeDistribution(low=low, high=high)


class ProfileRanges(BaseModel):
    """Range of every pathology knob within a group."""
    lognormals_per_stroke: FloatRangeDistribution = _r(2.5, 3.5)
    sigma_jitter: FloatRangeDistribution = _r(0.01, 0.03)
    tremor_amp: FloatRangeDistribution = _r(0.0, 0.0)
    tremor_freq: FloatRangeDistribution = _r(4.5, 5.5)
    speed_scale: FloatRangeDistribution = _r(0.9, 1.1)
    pause_scale: FloatRangeDistribution = _r(0.9, 1.1)
    pressure_level: FloatRangeDistribution = _r(0.5, 0.7)

    def towards(self, other: "ProfileRanges", gap: float) -> "ProfileRanges":
        return ProfileRanges(**{
            name: getattr(self, name).towards(getattr(other, name), gap) for name in type(self).model_fields
        })

    def draw(self, group: Group, rng: np.random.Generator) -> SubjectProfile:
        knobs = {name: getattr(self, name).create_value(rng) for name in type(self).model_fields}
        knobs["lognormals_per_stroke"] = max(1.0, knobs["lognormals_per_stroke"])
        knobs["tremor_freq"] = float(np.clip(knobs["tremor_freq"], 3.0, 8.0))
        knobs["tremor_amp"] = max(0.0, knobs["tremor_amp"])
        knobs["sigma_jitter"] = max(0.0, knobs["sigma_jitter"])
        knobs["speed_scale"] = max(0.1, knobs["speed_scale"])
        knobs["pause_scale"] = max(0.1, knobs["pause_scale"])
        knobs["pressure_level"] = float(np.clip(knobs["pressure_level"], 0.05, 1.0))
        return SubjectProfile(group=group, **knobs)


def default_profiles() -> Dict[Group, ProfileRanges]:
    return {
        Group.PD: ProfileRanges(
            lognormals_per_stroke=_r(7.0, 9.0), sigma_jitter=_r(0.12, 0.18), tremor_amp=_r(2.0, 4.0),
            tremor_freq=_r(4.0, 6.0), speed_scale=_r(0.6, 0.8), pause_scale=_r(1.3, 1.8),
            pressure_level=_r(0.35, 0.55),
        ),
        Group.EHC: ProfileRanges(speed_scale=_r(0.85, 1.0), pause_scale=_r(1.0, 1.2)),
        Group.YHC: ProfileRanges(lognormals_per_stroke=_r(2.0, 3.0), speed_scale=_r(1.0, 1.2),
                                 pause_scale=_r(0.8, 1.0), pressure_level=_r(0.55, 0.75)),
    }


class CohortConfig(BaseModel):
    """
    counts: subjects per group (the clinical cohort sizes by default);
    gap: scales the distance of the PD ranges from the EHC ranges (1 = the configured ranges).
    """
    counts: Dict[Group, int] = dict(DEFAULT_COUNTS)
    tasks: List[TaskId] = list(ALL_TASKS)
    profiles: Dict[Group, ProfileRanges] = default_profiles()
    gap: float = 1.0
    sample_rate: float = DEFAULT_SAMPLE_RATE
    min_pen_down: float = MIN_PEN_DOWN_S

    @field_validator("counts")
    @classmethod
    def _non_negative(cls, counts: Dict[Group, int]) -> Dict[Group, int]:
        if any(c < 0 for c in counts.values()):
            raise ValueError(f"group counts must be non-negative, got {counts}")
        return counts

    @field_validator("gap")
    @classmethod
    def _gap_range(cls, gap: float) -> float:
        if not 0.0 <= gap <= MAX_GAP:
            raise ValueError(f"gap must lie in [0, {MAX_GAP}], got {gap}")
        return gap

    def ranges_of(self, group: Group) -> ProfileRanges:
        ranges = self.profiles.get(group, ProfileRanges())
        if group is Group.PD and Group.EHC in self.profiles:
            return ranges.towards(self.profiles[Group.EHC], self.gap)
        return ranges

    def scaled(self, scale: float) -> "CohortConfig":
        """Group sizes scaled proportionally, at least 2 per non-empty group."""
        counts = {g: (max(2, int(round(c * scale))) if c > 0 else 0) for g, c in self.counts.items()}
        return self.model_copy(update={"counts": counts})


def load_cohort_config(path: Optional[str] = None) -> CohortConfig:
    if path is None:
        return CohortConfig()
    return CohortConfig.model_validate(read_structured_file(path))


def subject_ids(config: CohortConfig) -> List[Tuple[str, Group]]:
    """Subjects in generation order: groups in declaration order, ids numbered from 1."""
    return [(f"{g.value}{i:03d}", g) for g in Group for i in range(1, config.counts.get(g, 0) + 1)]


def _sexes(group: Group, count: int) -> List[str]:
    total = DEFAULT_COUNTS[group]
    males = int(round(count * MALE_COUNTS[group] / total))
    return ["M"] * males + ["F"] * (count - males)


def _task_seed(subject_seed: np.random.SeedSequence, task: TaskId) -> np.random.SeedSequence:
    """Independent of which tasks are generated."""
    return np.random.SeedSequence(subject_seed.entropy, spawn_key=(*subject_seed.spawn_key, list(TaskId).index(task)))


def _synth_subject(item: Tuple[str, Group, str, np.random.SeedSequence], config: CohortConfig, out_dir: str
                   ) -> Tuple[List[Dict[str, object]], List[GroundTruth]]:
    subject_id, group, sex, seed = item
    rng = np.random.default_rng(seed)
    mean, std, low, high = AGE_TABLE[(group, sex)]
    age = ClippedNormal(mean=mean, std=std, low=low, high=high).create_value(rng)
    profile = config.ranges_of(group).draw(group, rng)

    rows, truths = [], []
    subject_dir = os.path.join(out_dir, "recordings", subject_id)
    try:
        os.makedirs(subject_dir, exist_ok=True)
        for task in config.tasks:
            rec, truth = synth_task(profile, task, _task_seed(seed, task), subject_id, config.sample_rate,
                                    config.min_pen_down)
            relative = os.path.join("recordings", subject_id, f"{task.value}.csv")
            write_recording(rec, os.path.join(out_dir, relative))
            rows.append({"subject_id": subject_id, "group": group.value, "age": int(round(age)), "sex": sex,
                         "task": task.value, "file_path": relative.replace(os.sep, "/")})
            truths.append(truth)
    except OSError as e:
        raise IoFailure(f"cannot write recordings of {subject_id}: {e}") from e
    return rows, truths


def synth_cohort(config: CohortConfig, seed: int, out_dir: str, threads: int = 1) -> pd.DataFrame:
    """
    Writes ``recordings/<subject>/<task>.csv``, ``manifest.csv`` and
    ``ground_truth/<subject>.json`` under ``out_dir``. Every subject draws from its
    own seed spawned from ``seed``, so the output does not depend on ``threads``.

    :return: the dataset manifest
    """
    subjects = subject_ids(config)
    seeds = np.random.SeedSequence(seed).spawn(len(subjects))
    sexes: Dict[str, str] = dict()
    for group in Group:
        ids = [s for s, g in subjects if g is group]
        sexes.update(zip(ids, _sexes(group, len(ids))))
    items = [(s, g, sexes[s], ss) for (s, g), ss in zip(subjects, seeds)]

    try:
        os.makedirs(os.path.join(out_dir, "ground_truth"), exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {out_dir}: {e}") from e

    with log_exec_timer(f"synth {len(subjects)} subjects x {len(config.tasks)} tasks"):
        results = parallel_map(_synth_subject, items, n_workers=threads, desc="synth", config=config,
                               out_dir=out_dir)

    manifest_rows = []
    for (subject_id, _, _, _), (rows, truths) in zip(items, results):
        manifest_rows.extend(rows)
        path = os.path.join(out_dir, "ground_truth", f"{subject_id}.json")
        try:
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write("[\n" + ",\n".join(t.model_dump_json() for t in truths) + "\n]\n")
        except OSError as e:
            raise IoFailure(f"cannot write {path}: {e}") from e

    manifest = pd.DataFrame(manifest_rows, columns=MANIFEST_COLUMNS)
    manifest_path = os.path.join(out_dir, "manifest.csv")
    try:
        manifest.to_csv(manifest_path, index=False, lineterminator="\n")
    except OSError as e:
        raise IoFailure(f"cannot write {manifest_path}: {e}") from e
    logger.info(f"Synthetic cohort of {len(subjects)} subjects written to {os.path.abspath(out_dir)}")
    return manifest


def read_ground_truth(path: str) -> List[GroundTruth]:
    with open(path, "r", encoding="utf-8") as f:
        return [GroundTruth.model_validate(item) for item in json.load(f)]
