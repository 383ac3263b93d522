"""
The nonlinear feature battery: every measure of the subpackage applied to a few
scalar series of a task. A measure that cannot be computed for a series is
reported as absent (``None``) instead of failing the whole task.
"""
import logging
from collections import OrderedDict
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from hwpd.config import NonlinearSettings
from hwpd.errors import HwpdError
from hwpd.features.nonlinear.complexity import energy_snr, entropy, hurst_rs, lempel_ziv
from hwpd.features.nonlinear.dynamics import correlation_dimension, largest_lyapunov
from hwpd.features.nonlinear.embedding import embed_delay, select_embedding
from hwpd.features.nonlinear.emd import emd_features
from hwpd.signals.strokes import Stroke

logger = logging.getLogger(__name__)

PREFIX = "nl"
SERIES_NAMES = ("speed", "pressure", "x", "y")
MEASURE_NAMES = (
    "d2", "lambda_max", "hurst", "lz_norm",
    "shannon_bits", "renyi2_bits", "renyi3_bits",
    "snr_conventional_db", "snr_teager_db",
    "imf_count", "imf1_energy_ratio", "imf1_mean_freq",
)
MEASURE_UNITS = {
    "d2": "1", "lambda_max": "1/s", "hurst": "1", "lz_norm": "1",
    "shannon_bits": "bits", "renyi2_bits": "bits", "renyi3_bits": "bits",
    "snr_conventional_db": "dB", "snr_teager_db": "dB",
    "imf_count": "count", "imf1_energy_ratio": "1", "imf1_mean_freq": "Hz",
}

NonlinearFeatureSet = Dict[str, Optional[float]]


def feature_name(series: str, measure: str) -> str:
    return f"{PREFIX}.{series}.{measure}"


def nonlinear_feature_names(series: Sequence[str] = SERIES_NAMES) -> List[str]:
    return [feature_name(s, m) for s in series for m in MEASURE_NAMES]


def task_series(strokes: Sequence[Stroke]) -> Dict[str, np.ndarray]:
    """Pen-down samples of all strokes concatenated in temporal order."""
    return {
        "speed": np.concatenate([s.speed for s in strokes]),
        "pressure": np.concatenate([s.p for s in strokes]),
        "x": np.concatenate([s.x for s in strokes]),
        "y": np.concatenate([s.y for s in strokes]),
    }


def _guarded(name: str, func: Callable[[], Dict[str, float]], keys: Sequence[str]) -> Dict[str, Optional[float]]:
    try:
        values = func()
    except HwpdError as e:
        logger.debug(f"{name}: {type(e).__name__}: {e}")
        return {k: None for k in keys}
    return {k: (float(v) if np.isfinite(v) else None) for k, v in values.items()}


def series_features(series: np.ndarray, sample_rate: float,
                    settings: Optional[NonlinearSettings] = None,
                    label: str = "series") -> NonlinearFeatureSet:
    """
    Computes every measure for one series. Measures that share work (embedding,
    entropies, SNRs, EMD) are grouped, and a group fails as a whole.
    """
    settings = settings or NonlinearSettings()
    s = np.asarray(series, dtype=float)
    result: Dict[str, Optional[float]] = {}

    embedding = None
    try:
        embedding = select_embedding(s, bins=settings.entropy_bins, max_dim=settings.max_embedding_dim)
    except HwpdError as e:
        logger.debug(f"{label}: no embedding, {type(e).__name__}: {e}")

    if embedding is not None:
        points = embed_delay(s, embedding)
        result.update(_guarded(f"{label}.d2", lambda: {"d2": correlation_dimension(
            points, theiler=embedding.theiler_window, max_points=settings.max_pair_points)}, ["d2"]))
        result.update(_guarded(f"{label}.lambda_max", lambda: {"lambda_max": largest_lyapunov(
            points, sample_rate, theiler=embedding.theiler_window,
            max_steps=settings.lyapunov_max_steps)}, ["lambda_max"]))
    else:
        result.update({"d2": None, "lambda_max": None})

    result.update(_guarded(f"{label}.hurst", lambda: {"hurst": hurst_rs(s)}, ["hurst"]))
    result.update(_guarded(f"{label}.lz_norm", lambda: {"lz_norm": lempel_ziv(s)}, ["lz_norm"]))

    entropy_keys = ["shannon_bits", "renyi2_bits", "renyi3_bits"]
    result.update(_guarded(f"{label}.entropy", lambda: dict(zip(
        entropy_keys, [entropy(s, order, settings.entropy_bins) for order in (1, 2, 3)])), entropy_keys))

    snr_keys = ["snr_conventional_db", "snr_teager_db"]
    result.update(_guarded(f"{label}.snr", lambda: dict(zip(snr_keys, energy_snr(s, sample_rate))), snr_keys))

    emd_keys = ["imf_count", "imf1_energy_ratio", "imf1_mean_freq"]
    result.update(_guarded(f"{label}.emd", lambda: dict(zip(emd_keys, emd_features(s, sample_rate))), emd_keys))

    return OrderedDict((m, result[m]) for m in MEASURE_NAMES)


def nonlinear_features(strokes: Sequence[Stroke], sample_rate: float,
                       settings: Optional[NonlinearSettings] = None) -> NonlinearFeatureSet:
    """
    Nonlinear battery of a task over the configured series.

    :return: ordered map ``nl.<series>.<measure>`` -> value, ``None`` when absent
    """
    settings = settings or NonlinearSettings()
    all_series = task_series(strokes)
    unknown = [s for s in settings.series if s not in all_series]
    if unknown:
        raise ValueError(f"Unsupported nonlinear series: {unknown}")

    features: NonlinearFeatureSet = OrderedDict()
    for name in settings.series:
        values = series_features(all_series[name], sample_rate, settings, label=name)
        for measure, value in values.items():
            features[feature_name(name, measure)] = value
    absent = sum(v is None for v in features.values())
    if absent:
        logger.debug(f"{absent} of {len(features)} nonlinear features absent")
    return features
