"""
Global kinematic features of a task and the per-stroke quantities that are
summarized across strokes by functionals.
"""
import logging
from collections import OrderedDict
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from hwpd.config import KinematicSettings
from hwpd.features.functionals import functional_names
from hwpd.signals.recording import TaskRecording
from hwpd.signals.strokes import Stroke

logger = logging.getLogger(__name__)

PREFIX = "kin"
STROKE_PREFIX = "kin.stroke"

TASK_FEATURE_UNITS = OrderedDict([
    ("duration_total", "s"),
    ("duration_pen_down", "s"),
    ("duration_pen_up", "s"),
    ("pen_down_ratio", "1"),
    ("stroke_count", "count"),
    ("stroke_duration_mean", "s"),
    ("path_length", "mm"),
    ("speed_mean", "mm/s"),
    ("speed_max", "mm/s"),
    ("speed_std", "mm/s"),
    ("speed_median", "mm/s"),
    ("accel_mean", "mm/s^2"),
    ("accel_max", "mm/s^2"),
    ("accel_std", "mm/s^2"),
    ("jerk_mean", "mm/s^3"),
    ("jerk_max", "mm/s^3"),
    ("jerk_std", "mm/s^3"),
    ("pressure_mean", "1"),
    ("pressure_std", "1"),
    ("speed_peaks_per_second", "1/s"),
    ("curvature_mean", "1/mm"),
    ("curvature_std", "1/mm"),
    ("box_width", "mm"),
    ("box_height", "mm"),
    ("box_aspect", "1"),
    ("direction_entropy", "bits"),
    ("adjacent_distance_mean", "mm"),
    ("adjacent_distance_max", "mm"),
    ("vx_std", "mm/s"),
    ("vy_std", "mm/s"),
])

STROKE_QUANTITY_UNITS = OrderedDict([
    ("duration", "s"),
    ("path_length", "mm"),
    ("speed_mean", "mm/s"),
    ("speed_max", "mm/s"),
    ("accel_mean", "mm/s^2"),
    ("speed_peak_count", "count"),
    ("net_path_ratio", "1"),
    ("pressure_mean", "1"),
])

# pressure statistics are already task-level features
DEFAULT_STROKE_QUANTITIES = tuple(q for q in STROKE_QUANTITY_UNITS if q != "pressure_mean")
DIMENSIONLESS_FUNCTIONALS = ("kurtosis", "skewness")

KinematicFeatureSet = Dict[str, float]


def task_feature_name(name: str) -> str:
    return f"{PREFIX}.{name}"


def stroke_feature_name(quantity: str, functional: str) -> str:
    return f"{STROKE_PREFIX}.{quantity}.{functional}"


def kinematic_feature_names(include_range: bool = False,
                            stroke_quantities: Sequence[str] = tuple(STROKE_QUANTITY_UNITS)) -> List[str]:
    names = [task_feature_name(n) for n in TASK_FEATURE_UNITS]
    names += [stroke_feature_name(q, f) for q in stroke_quantities for f in functional_names(include_range)]
    return names


def kinematic_feature_units(name: str) -> str:
    parts = name.split(".")
    if parts[1] == "stroke":
        return "1" if parts[3] in DIMENSIONLESS_FUNCTIONALS else STROKE_QUANTITY_UNITS[parts[2]]
    return TASK_FEATURE_UNITS[parts[1]]


def _path_length(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(np.hypot(np.diff(x), np.diff(y))))


def count_speed_peaks(speed: np.ndarray, prominence: float = 0.05) -> int:
    """Local maxima of a speed profile whose prominence is at least ``prominence`` of the maximum speed."""
    top = float(np.max(speed)) if len(speed) else 0.0
    if top <= 0:
        return 0
    padded = np.concatenate(([0.0], speed, [0.0]))
    peaks, _ = find_peaks(padded, prominence=prominence * top)
    return len(peaks)


def direction_entropy(strokes: Sequence[Stroke], sectors: int = 8) -> float:
    """Entropy (bits) of the movement direction histogram with arc-length weights."""
    weights = np.zeros(sectors)
    for s in strokes:
        dx, dy = np.diff(s.x), np.diff(s.y)
        step = np.hypot(dx, dy)
        angle = np.mod(np.arctan2(dy, dx), 2 * np.pi)
        sector = np.minimum((angle / (2 * np.pi / sectors)).astype(int), sectors - 1)
        weights += np.bincount(sector, weights=step, minlength=sectors)
    total = weights.sum()
    if total <= 0:
        return 0.0
    p = weights[weights > 0] / total
    return float(max(-np.sum(p * np.log2(p)), 0.0))


def stroke_kinematic_series(stroke: Stroke, prominence: float = 0.05) -> Dict[str, float]:
    """Scalar quantities of one stroke, aggregated across strokes by functionals."""
    path = _path_length(stroke.x, stroke.y)
    net = float(np.hypot(stroke.x[-1] - stroke.x[0], stroke.y[-1] - stroke.y[0]))
    return OrderedDict([
        ("duration", stroke.duration),
        ("path_length", path),
        ("speed_mean", float(np.mean(stroke.speed))),
        ("speed_max", float(np.max(stroke.speed))),
        ("accel_mean", float(np.mean(stroke.accel))),
        ("speed_peak_count", float(count_speed_peaks(stroke.speed, prominence))),
        ("net_path_ratio", net / path if path > 0 else 0.0),
        ("pressure_mean", float(np.mean(stroke.p))),
    ])


def global_kinematic_features(rec: TaskRecording, strokes: Sequence[Stroke],
                              settings: Optional[KinematicSettings] = None) -> KinematicFeatureSet:
    """
    Task-level kinematic features (``kin.<name>``) of a preprocessed recording.
    Speed, acceleration, jerk, curvature and pressure statistics are taken over
    the pen-down samples of all strokes.
    """
    settings = settings or KinematicSettings()

    def cat(attr):
        return np.concatenate([getattr(s, attr) for s in strokes])

    speed, accel, jerk = cat("speed"), cat("accel"), cat("jerk")
    curvature, pressure = cat("curvature"), cat("p")
    x, y = cat("x"), cat("y")
    vx = np.concatenate([s.profiles.vx for s in strokes])
    vy = np.concatenate([s.profiles.vy for s in strokes])
    steps = np.concatenate([np.hypot(np.diff(s.x), np.diff(s.y)) for s in strokes])

    total = float(rec.t[-1] - rec.t[0])
    pen_down = float(sum(s.duration for s in strokes))
    width, height = float(np.ptp(x)), float(np.ptp(y))
    n_peaks = sum(count_speed_peaks(s.speed, settings.peak_prominence) for s in strokes)

    values = OrderedDict([
        ("duration_total", total),
        ("duration_pen_down", pen_down),
        ("duration_pen_up", max(total - pen_down, 0.0)),
        ("pen_down_ratio", pen_down / total if total > 0 else 1.0),
        ("stroke_count", float(len(strokes))),
        ("stroke_duration_mean", pen_down / len(strokes)),
        ("path_length", float(np.sum(steps))),
        ("speed_mean", float(np.mean(speed))),
        ("speed_max", float(np.max(speed))),
        ("speed_std", float(np.std(speed))),
        ("speed_median", float(np.median(speed))),
        ("accel_mean", float(np.mean(accel))),
        ("accel_max", float(np.max(accel))),
        ("accel_std", float(np.std(accel))),
        ("jerk_mean", float(np.mean(jerk))),
        ("jerk_max", float(np.max(jerk))),
        ("jerk_std", float(np.std(jerk))),
        ("pressure_mean", float(np.mean(pressure))),
        ("pressure_std", float(np.std(pressure))),
        ("speed_peaks_per_second", n_peaks / pen_down if pen_down > 0 else 0.0),
        ("curvature_mean", float(np.mean(curvature))),
        ("curvature_std", float(np.std(curvature))),
        ("box_width", width),
        ("box_height", height),
        ("box_aspect", height / width if width > 0 else 0.0),
        ("direction_entropy", direction_entropy(strokes, settings.direction_sectors)),
        ("adjacent_distance_mean", float(np.mean(steps)) if len(steps) else 0.0),
        ("adjacent_distance_max", float(np.max(steps)) if len(steps) else 0.0),
        ("vx_std", float(np.std(vx))),
        ("vy_std", float(np.std(vy))),
    ])
    return OrderedDict((task_feature_name(k), v) for k, v in values.items())
