import os
import tempfile

import numpy as np
import pandas as pd
import pytest

from hwpd.errors import InvalidProfile
from hwpd.evaluation.metrics import roc_auc
from hwpd.features.kinematic import global_kinematic_features
from hwpd.features.neuromotor import LognormalComponent, lognormal_eval
from hwpd.signals.preprocessing import preprocess
from hwpd.signals.recording import read_dataset_manifest
from hwpd.signals.strokes import segment_strokes
from hwpd.synth import (
    CohortConfig, SubjectProfile, load_cohort_config, read_ground_truth, render_stroke, synth_cohort, synth_task,
    tremor_term
)
from hwpd.synth.distributions import ClippedNormal, FloatRangeDistribution
from hwpd.tasks import Group, TaskId
from .conftest import RATE

SMALL = CohortConfig(counts={Group.PD: 4, Group.EHC: 4, Group.YHC: 4}, tasks=[TaskId.Circle, TaskId.Line1],
                     min_pen_down=1.0)


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_rendered_speed_is_lobes_plus_tremor():
    components = [LognormalComponent(D=20.0, t0=0.0, mu=-1.6, sigma=0.25),
                  LognormalComponent(D=10.0, t0=0.2, mu=-1.5, sigma=0.3)]
    stroke = render_stroke(components, [0.5, -0.3], tremor_amp=2.0, tremor_freq=5.0)
    local = stroke.t - stroke.t[0]
    expected = sum(lognormal_eval(c, local) for c in components) + tremor_term(stroke.t, 2.0, 5.0)
    np.testing.assert_allclose(stroke.speed, expected, atol=1e-12)


def test_rendered_path_carries_the_amplitudes():
    components = [LognormalComponent(D=20.0, t0=0.0, mu=-1.6, sigma=0.25),
                  LognormalComponent(D=10.0, t0=0.15, mu=-1.6, sigma=0.25)]
    stroke = render_stroke(components, [0.4, 0.4], start_time=2.0, sample_rate=RATE)

    assert stroke.path_length == pytest.approx(30.0, rel=0.02)
    assert stroke.t[0] == 2.0
    assert [c.t0 for c in stroke.components] == pytest.approx([2.0, 2.15])


def test_turns_must_match_components():
    with pytest.raises(ValueError):
        render_stroke([LognormalComponent(D=1.0, t0=0.0, mu=-1.6, sigma=0.25)], [0.1, 0.2])


def test_task_synthesis_is_deterministic():
    profile = SubjectProfile(group=Group.PD, tremor_amp=3.0, lognormals_per_stroke=8.0)
    first, truth = synth_task(profile, TaskId.Spiral, seed=21, min_pen_down=2.0)
    second, _ = synth_task(profile, TaskId.Spiral, seed=21, min_pen_down=2.0)
    other, _ = synth_task(profile, TaskId.Spiral, seed=22, min_pen_down=2.0)

    np.testing.assert_array_equal(first.x, second.x)
    assert not np.array_equal(first.x[:50], other.x[:50])
    assert np.sum(first.pen_down) / RATE >= 2.0
    assert truth.strokes[0].start_index == 0
    assert all(np.all(first.pen_down[s.start_index:s.stop_index]) for s in truth.strokes)
    np.testing.assert_allclose(np.diff(first.t), 1.0 / RATE)


@pytest.mark.parametrize(
    "input",
    [
        dict(tremor_freq=12.0),
        dict(lognormals_per_stroke=0.5),
        dict(speed_scale=0.0),
        dict(pressure_level=1.5),
        dict(tremor_amp=-1.0),
    ]
)
def test_invalid_profile(input):
    with pytest.raises(InvalidProfile):
        synth_task(SubjectProfile(group=Group.EHC, **input), TaskId.Circle, seed=0)


def test_distributions(rng):
    assert all(1.0 <= FloatRangeDistribution(low=1.0, high=2.0).create_value(rng) <= 2.0 for _ in range(100))
    assert all(0.0 <= ClippedNormal(mean=0.5, std=5.0, low=0.0, high=1.0).create_value(rng) <= 1.0
               for _ in range(100))
    assert FloatRangeDistribution(low=4.0, high=6.0).towards(FloatRangeDistribution(low=0.0, high=2.0), 0.5) \
        == FloatRangeDistribution(low=2.0, high=4.0)
    with pytest.raises(ValueError):
        FloatRangeDistribution(low=2.0, high=1.0)


def test_gap_moves_pd_towards_ehc():
    config = CohortConfig(gap=0.0)
    assert config.ranges_of(Group.PD) == config.profiles[Group.EHC]
    assert CohortConfig().ranges_of(Group.PD) == CohortConfig().profiles[Group.PD]
    for gap in (-0.1, 3.5):
        with pytest.raises(ValueError):
            CohortConfig(gap=gap)
    with pytest.raises(ValueError):
        CohortConfig(counts={Group.PD: -1})


def test_scaled_counts():
    assert CohortConfig().scaled(0.1).counts == {Group.PD: 6, Group.EHC: 5, Group.YHC: 4}
    assert CohortConfig(counts={Group.PD: 3, Group.EHC: 0}).scaled(0.1).counts == {Group.PD: 2, Group.EHC: 0}


def test_shipped_cohort_config(conf_path):
    assert load_cohort_config(os.path.join(conf_path, "cohort.yaml")) == CohortConfig()
    assert load_cohort_config(None) == CohortConfig()


def test_cohort_files():
    with tempfile.TemporaryDirectory(prefix="hwpd_synth_") as tmp:
        manifest = synth_cohort(SMALL, seed=5, out_dir=tmp)

        assert len(manifest) == 12 * 2
        assert manifest.groupby("group")["subject_id"].nunique().to_dict() == {"EHC": 4, "PD": 4, "YHC": 4}
        dataset = read_dataset_manifest(os.path.join(tmp, "manifest.csv"))
        assert all(os.path.exists(p) for p in dataset["file_path"])

        truths = read_ground_truth(os.path.join(tmp, "ground_truth", "PD001.json"))
        assert [t.task for t in truths] == [TaskId.Circle, TaskId.Line1]
        assert truths[0].profile.group is Group.PD
        assert truths[0].profile.tremor_amp >= 2.0


def test_cohort_output_depends_on_the_seed_only():
    with tempfile.TemporaryDirectory(prefix="hwpd_synth_") as first, \
            tempfile.TemporaryDirectory(prefix="hwpd_synth_") as second:
        synth_cohort(SMALL, seed=5, out_dir=first)
        synth_cohort(SMALL.model_copy(update={"tasks": [TaskId.Line1]}), seed=5, out_dir=second)
        relative = os.path.join("recordings", "YHC002", "Line1.csv")
        assert _read_bytes(os.path.join(first, relative)) == _read_bytes(os.path.join(second, relative))


@pytest.mark.slow
def test_cohort_does_not_depend_on_threads():
    with tempfile.TemporaryDirectory(prefix="hwpd_synth_") as first, \
            tempfile.TemporaryDirectory(prefix="hwpd_synth_") as second:
        synth_cohort(SMALL, seed=9, out_dir=first, threads=1)
        synth_cohort(SMALL, seed=9, out_dir=second, threads=2)
        for name in ("manifest.csv", os.path.join("ground_truth", "EHC003.json"),
                     os.path.join("recordings", "PD004", "Circle.csv")):
            assert _read_bytes(os.path.join(first, name)) == _read_bytes(os.path.join(second, name))


def _group_features(config, group, seed, n=8):
    """Task-level kinematic features of n subjects drawn from a group's ranges"""
    rng = np.random.default_rng(seed)
    ranges = config.ranges_of(group)
    rows = []
    for i in range(n):
        rec, _ = synth_task(ranges.draw(group, rng), TaskId.Line1, int(rng.integers(2 ** 32)),
                            subject_id=f"{group.value}{i:03d}", min_pen_down=4.0)
        clean = preprocess(rec)
        rows.append(global_kinematic_features(clean, segment_strokes(clean)))
    return pd.DataFrame(rows)


@pytest.mark.slow
@pytest.mark.parametrize("input", ["kin.speed_mean", "kin.pressure_mean"])
def test_pd_features_follow_the_knobs(input):
    """Slower, lighter PD writing shows up in the extracted features"""
    config = CohortConfig()
    pd_mean = _group_features(config, Group.PD, seed=1)[input].mean()
    control_mean = _group_features(config, Group.YHC, seed=2)[input].mean()
    assert pd_mean < control_mean


@pytest.mark.slow
def test_separability_grows_with_the_gap():
    """AUC of the mean speed between PD and EHC, averaged over five seeds per gap"""
    separability = []
    for gap in (0.0, 0.5, 1.0):
        config = CohortConfig(gap=gap)
        aucs = []
        for seed in range(5):
            patients = _group_features(config, Group.PD, seed=100 + seed)["kin.speed_mean"]
            controls = _group_features(config, Group.EHC, seed=200 + seed)["kin.speed_mean"]
            labels = [1] * len(patients) + [0] * len(controls)
            aucs.append(roc_auc(labels, -np.concatenate([patients, controls])).auc)
        separability.append(float(np.mean(aucs)))

    assert separability == sorted(separability)
    assert separability[0] < 0.75 and separability[2] > 0.9
