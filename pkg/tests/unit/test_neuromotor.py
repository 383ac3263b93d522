import os
import tempfile

import numpy as np
import pandas as pd
import pytest
from scipy.integrate import trapezoid

from hwpd.errors import EmptyFit, InvalidParams, NoPeak, TooShort
from hwpd.features.neuromotor import (
    FIT_DUMP_COLUMNS, LognormalComponent, SigmaLognormalFit, extract_sigma_lognormal, lognormal_eval,
    neuromotor_feature_names, neuromotor_features, task_neuromotor_features, write_fit_dump
)
from hwpd.signals.strokes import segment_strokes
from hwpd.synth.generator import render_stroke
from hwpd.tasks import TaskId
from .conftest import RATE, make_recording, two_strokes

SINGLE = LognormalComponent(D=10.0, t0=0.0, mu=-1.5, sigma=0.3)


def _grid(duration=1.5):
    return np.arange(int(duration * RATE) + 1) / RATE


def _profile(components, t):
    return np.sum([lognormal_eval(c, t) for c in components], axis=0)


def test_lognormal_integral_and_peak():
    """The area under a lognormal is D and the maximum is at t0 + exp(mu - sigma^2)"""
    t = np.linspace(0.0, 5.0, 200_001)
    v = lognormal_eval(SINGLE, t)
    assert trapezoid(v, t) == pytest.approx(SINGLE.D, rel=1e-4)
    assert t[np.argmax(v)] == pytest.approx(SINGLE.t_peak, abs=1e-4)
    assert np.all(v[t <= SINGLE.t0] == 0.0)


@pytest.mark.parametrize(
    "input",
    [
        LognormalComponent(D=1.0, t0=0.0, mu=-1.0, sigma=0.0),
        LognormalComponent(D=0.0, t0=0.0, mu=-1.0, sigma=0.2),
        LognormalComponent(D=1.0, t0=0.0, mu=-1.0, sigma=-0.2),
    ]
)
def test_invalid_params(input):
    with pytest.raises(InvalidParams):
        lognormal_eval(input, _grid())


def test_single_component_round_trip():
    t = _grid()
    fit = extract_sigma_lognormal(t, lognormal_eval(SINGLE, t))

    assert len(fit.components) == 1
    assert fit.reconstruction_snr_db >= 25.0
    c = fit.components[0]
    assert c.D == pytest.approx(SINGLE.D, rel=0.05)
    assert c.t0 == pytest.approx(SINGLE.t0, abs=0.02)
    assert c.mu == pytest.approx(SINGLE.mu, abs=0.05)
    assert c.sigma == pytest.approx(SINGLE.sigma, abs=0.02)
    assert fit.snr_history == sorted(fit.snr_history)


@pytest.mark.slow
@pytest.mark.parametrize("count", [1, 2, 3, 5])
def test_multi_component_round_trip(count):
    """Well separated lobes are recovered one by one"""
    truth = [LognormalComponent(D=10.0, t0=0.45 * k, mu=-1.6, sigma=0.15) for k in range(count)]
    t = _grid(0.45 * count + 0.6)
    fit = extract_sigma_lognormal(t, _profile(truth, t))

    assert len(fit.components) == count
    assert fit.reconstruction_snr_db >= 25.0
    np.testing.assert_allclose([c.t_peak for c in fit.components], [c.t_peak for c in truth], atol=0.01)


def test_time_shift_equivariance():
    t = _grid()
    speed = lognormal_eval(SINGLE, t)
    base = extract_sigma_lognormal(t, speed)
    shifted = extract_sigma_lognormal(t + 3.7, speed)

    assert len(shifted.components) == len(base.components)
    for a, b in zip(base.components, shifted.components):
        assert b.t0 == pytest.approx(a.t0 + 3.7, abs=1e-6)
        assert b.mu == pytest.approx(a.mu, abs=1e-6)
        assert b.sigma == pytest.approx(a.sigma, abs=1e-6)
        assert b.D == pytest.approx(a.D, rel=1e-6)


def test_amplitude_scaling_equivariance():
    t = _grid()
    speed = lognormal_eval(SINGLE, t)
    base = extract_sigma_lognormal(t, speed)
    doubled = extract_sigma_lognormal(t, 2.0 * speed)

    assert [c.D * 2.0 for c in base.components] == [c.D for c in doubled.components]
    assert [c.mu for c in base.components] == [c.mu for c in doubled.components]
    assert doubled.reconstruction_snr_db == base.reconstruction_snr_db


@pytest.mark.parametrize(
    "input,expected_error",
    [
        (np.zeros(50), NoPeak),
        (np.ones(10), TooShort),
    ]
)
def test_extraction_errors(input, expected_error):
    with pytest.raises(expected_error):
        extract_sigma_lognormal(np.arange(len(input)) / RATE, input)


def _fit(components, snr=30.0, residual=0.001):
    return SigmaLognormalFit(components=components, reconstruction_snr_db=snr, residual_energy_ratio=residual)


def test_features_of_a_single_component():
    stroke = segment_strokes(two_strokes())[0]
    fit = _fit([LognormalComponent(D=12.0, t0=-0.05, mu=-1.4, sigma=0.25)])
    features = neuromotor_features([(stroke, fit)], pen_down_duration=2.0)

    assert list(features) == neuromotor_feature_names()
    assert len(features) == 28
    assert features["nm.count_mean"] == 1.0
    assert features["nm.count_std"] == 0.0
    assert features["nm.d_mean"] == 12.0
    assert features["nm.t0_offset_mean"] == pytest.approx(-0.05)
    assert features["nm.peak_spacing_mean"] == 0.0
    assert features["nm.lognormals_per_second"] == pytest.approx(0.5)
    assert features["nm.snr_min"] == 30.0


def test_features_across_strokes():
    """Statistics pool the components of every stroke"""
    first, second = segment_strokes(two_strokes())
    fits = [
        (first, _fit([LognormalComponent(D=10.0, t0=0.0 + 0.3 * k, mu=-1.6, sigma=0.2) for k in range(2)],
                     snr=20.0, residual=0.01)),
        (second, _fit([LognormalComponent(D=20.0, t0=second.t[0] + 0.2 * k, mu=-1.6, sigma=0.2)
                       for k in range(4)], snr=30.0, residual=0.001)),
    ]
    features = neuromotor_features(fits, pen_down_duration=2.0)

    assert features["nm.count_mean"] == 3.0
    assert features["nm.count_std"] == 1.0
    assert features["nm.count_max"] == 4.0
    assert features["nm.d_min"] == 10.0 and features["nm.d_max"] == 20.0
    assert features["nm.d_mean"] == pytest.approx((2 * 10.0 + 4 * 20.0) / 6)
    assert features["nm.peak_spacing_min"] == pytest.approx(0.2)
    assert features["nm.peak_spacing_max"] == pytest.approx(0.3)
    assert features["nm.t0_offset_mean"] == pytest.approx((0.0 + 0.3 + 0.0 + 0.2 + 0.4 + 0.6) / 6)
    assert features["nm.lognormals_per_second"] == pytest.approx(3.0)
    assert features["nm.snr_mean"] == pytest.approx(25.0)
    assert features["nm.residual_energy_max"] == pytest.approx(0.01)


def test_empty_fit():
    with pytest.raises(EmptyFit):
        neuromotor_features([], pen_down_duration=1.0)


@pytest.mark.parametrize("task", [TaskId.Alphabet, TaskId.FreeWriting, TaskId.Rey])
def test_skip_list_tasks_have_no_neuromotor_block(task):
    features = task_neuromotor_features(task, segment_strokes(two_strokes()))
    assert list(features) == neuromotor_feature_names()
    assert all(v is None for v in features.values())


def test_unfittable_task_is_absent(caplog):
    features = task_neuromotor_features(TaskId.Circle, segment_strokes(two_strokes()), fits=[])
    assert all(v is None for v in features.values())
    assert "neuromotor features absent" in caplog.text


def test_fit_dump():
    rendered = render_stroke([SINGLE, LognormalComponent(D=6.0, t0=0.4, mu=-1.6, sigma=0.2)],
                             turns=[0.5, -0.5], sample_rate=RATE)
    stroke = segment_strokes(_stroke_recording(rendered))[0]
    fit = extract_sigma_lognormal(stroke.t, stroke.speed)

    with tempfile.TemporaryDirectory(prefix="hwpd_fit_") as tmp:
        path = os.path.join(tmp, "fit.csv")
        write_fit_dump(fit, stroke, path)
        dump = pd.read_csv(path)

    assert list(dump.columns) == FIT_DUMP_COLUMNS
    assert dump["component_index"].tolist() == list(range(len(fit.components)))
    assert dump["t_peak"].is_monotonic_increasing


def _stroke_recording(rendered):
    return make_recording(rendered.t, rendered.x, rendered.y, p=rendered.p)
