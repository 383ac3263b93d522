import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List

import numpy as np

from hwpd.errors import NoStrokes, TooShort
from hwpd.signals.preprocessing import pen_down_runs
from hwpd.signals.recording import TaskRecording
from hwpd.tasks import TaskId

logger = logging.getLogger(__name__)

# (0.01 mm/s)^2
CURVATURE_GUARD = 1e-4


@dataclass(frozen=True)
class KinematicProfiles:
    vx: np.ndarray
    vy: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    jx: np.ndarray
    jy: np.ndarray
    speed: np.ndarray
    accel: np.ndarray
    jerk: np.ndarray
    path_angle: np.ndarray
    curvature: np.ndarray


def kinematic_derivatives(t: np.ndarray, x: np.ndarray, y: np.ndarray) -> KinematicProfiles:
    """
    Central-difference derivatives (one-sided at the ends) of a pen trajectory.

    ``accel`` and ``jerk`` are magnitudes of the second and third derivative
    vectors; ``curvature`` is signed and set to 0 where the speed is below 0.01 mm/s.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(t) < 4:
        raise TooShort(f"derivatives need at least 4 samples, got {len(t)}")

    vx, vy = np.gradient(x, t), np.gradient(y, t)
    ax, ay = np.gradient(vx, t), np.gradient(vy, t)
    jx, jy = np.gradient(ax, t), np.gradient(ay, t)

    speed_sq = vx ** 2 + vy ** 2
    curvature = np.zeros_like(speed_sq)
    moving = speed_sq >= CURVATURE_GUARD
    curvature[moving] = (vx[moving] * ay[moving] - vy[moving] * ax[moving]) / speed_sq[moving] ** 1.5

    return KinematicProfiles(
        vx=vx, vy=vy, ax=ax, ay=ay, jx=jx, jy=jy,
        speed=np.sqrt(speed_sq),
        accel=np.hypot(ax, ay),
        jerk=np.hypot(jx, jy),
        path_angle=np.unwrap(np.arctan2(vy, vx)),
        curvature=curvature,
    )


@dataclass(frozen=True, eq=False)
class Stroke:
    task: TaskId
    index: int
    start: int
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    @property
    def stop(self) -> int:
        return self.start + len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @cached_property
    def profiles(self) -> KinematicProfiles:
        return kinematic_derivatives(self.t, self.x, self.y)

    @property
    def speed(self) -> np.ndarray:
        return self.profiles.speed

    @property
    def accel(self) -> np.ndarray:
        return self.profiles.accel

    @property
    def jerk(self) -> np.ndarray:
        return self.profiles.jerk

    @property
    def path_angle(self) -> np.ndarray:
        return self.profiles.path_angle

    @property
    def curvature(self) -> np.ndarray:
        return self.profiles.curvature


class StrokeList(list):
    """Ordered strokes of a recording; ``discarded`` counts runs that were too short."""

    def __init__(self, strokes=(), discarded: int = 0):
        super().__init__(strokes)
        self.discarded = discarded


def segment_strokes(rec: TaskRecording, min_stroke_samples: int = 10) -> StrokeList:
    """
    Splits a (preprocessed) recording at pen-up samples.

    :param rec: a recording, usually the output of ``preprocess``
    :param min_stroke_samples: shorter pen-down runs are discarded and counted
    :return: strokes in temporal order
    """
    strokes = []
    discarded = 0
    for a, b in pen_down_runs(rec.pen_down):
        if b - a < min_stroke_samples:
            discarded += 1
            continue
        strokes.append(Stroke(
            task=rec.task,
            index=len(strokes),
            start=a,
            t=rec.t[a:b],
            x=rec.x[a:b],
            y=rec.y[a:b],
            p=rec.p[a:b],
        ))

    if not strokes:
        raise NoStrokes(f"{rec.subject_id}/{rec.task.value}: no pen-down run with at least "
                        f"{min_stroke_samples} samples")
    if discarded:
        logger.debug(f"{rec.subject_id}/{rec.task.value}: discarded {discarded} short pen-down runs")
    return StrokeList(strokes, discarded=discarded)
