"""
Sigma-Lognormal synthesizer of tablet recordings.

A stroke is a sum of lognormal speed lobes; its direction turns by each
component's share of the task's angle script, weighted by the lognormal
cumulative distribution. Tremor adds a sinusoid to the speed. The trajectory
is integrated from speed and direction at the tablet rate.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel
from scipy.integrate import cumulative_trapezoid
from scipy.signal.windows import tukey
from scipy.stats import lognorm

from hwpd.errors import InvalidProfile
from hwpd.features.neuromotor import LognormalComponent, lognormal_eval
from hwpd.signals.recording import DEFAULT_SAMPLE_RATE, TaskRecording
from hwpd.synth.scripts import StrokeScript, component_turns, task_script
from hwpd.tasks import Group, TaskId

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]

TREMOR_FREQ_RANGE = (3.0, 8.0)
SIGMA_MEAN = 0.25
SIGMA_RANGE = (0.05, 1.0)
MU_MEAN = -1.6
MU_STD = 0.1
STROKE_SPAN = (0.45, 0.85)
STROKE_PATH_MM = (20.0, 40.0)
LOBE_TAIL = 2.5
BASE_PAUSE_S = 0.25
PRESSURE_FLOOR = 0.2
MIN_PEN_DOWN_S = 8.0
MAX_STROKES = 200
ORIGIN_MM = (20.0, 100.0)


class SubjectProfile(BaseModel):
    """
    Pathology knobs of one synthetic subject.

    lognormals_per_stroke: mean component count of a stroke;
    sigma_jitter: std of the log-response times around 0.25;
    tremor_amp: mm/s; tremor_freq: Hz;
    speed_scale: below 1 slows every movement down;
    pause_scale: dilation of pen-up gaps;
    pressure_level: peak pen pressure in (0, 1].
    """
    group: Group
    lognormals_per_stroke: float = 3.0
    sigma_jitter: float = 0.02
    tremor_amp: float = 0.0
    tremor_freq: float = 5.0
    speed_scale: float = 1.0
    pause_scale: float = 1.0
    pressure_level: float = 0.6

    def check(self) -> "SubjectProfile":
        """:raises InvalidProfile: a knob is outside its domain"""
        low, high = TREMOR_FREQ_RANGE
        if not low <= self.tremor_freq <= high:
            raise InvalidProfile(f"tremor_freq must lie in [{low}, {high}] Hz, got {self.tremor_freq}")
        if self.lognormals_per_stroke < 1:
            raise InvalidProfile(f"lognormals_per_stroke must be at least 1, got {self.lognormals_per_stroke}")
        if self.sigma_jitter < 0 or self.tremor_amp < 0:
            raise InvalidProfile("sigma_jitter and tremor_amp must be non-negative")
        if self.speed_scale <= 0 or self.pause_scale <= 0:
            raise InvalidProfile("speed_scale and pause_scale must be positive")
        if not 0 < self.pressure_level <= 1:
            raise InvalidProfile(f"pressure_level must lie in (0, 1], got {self.pressure_level}")
        return self


class ComponentTruth(BaseModel):
    D: float
    t0: float
    mu: float
    sigma: float

    def to_component(self) -> LognormalComponent:
        return LognormalComponent(D=self.D, t0=self.t0, mu=self.mu, sigma=self.sigma)


class StrokeTruth(BaseModel):
    start_index: int
    stop_index: int
    start_time: float
    path_length: float
    components: List[ComponentTruth]


class GroundTruth(BaseModel):
    """Generating components of every stroke, in recording time."""
    subject_id: str
    group: Group
    task: TaskId
    profile: SubjectProfile
    strokes: List[StrokeTruth]

    @property
    def path_length(self) -> float:
        return sum(s.path_length for s in self.strokes)

    def components(self, stroke: int) -> List[LognormalComponent]:
        return [c.to_component() for c in self.strokes[stroke].components]


@dataclass(frozen=True, eq=False)
class RenderedStroke:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    # signed speed before integration: lognormal lobes plus tremor
    speed: np.ndarray
    components: List[LognormalComponent]

    @property
    def path_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))


def tremor_term(t: np.ndarray, amplitude: float, frequency: float) -> np.ndarray:
    return amplitude * np.sin(2.0 * np.pi * frequency * np.asarray(t, dtype=float))


def stroke_duration(components: Sequence[LognormalComponent]) -> float:
    """Time until the last lobe has decayed to its far tail."""
    ends = [c.t0 + np.exp(c.mu + LOBE_TAIL * c.sigma) for c in components]
    peaks = [c.t_peak for c in components]
    return float(max(max(ends), max(peaks) + 0.1))


def render_stroke(components: Sequence[LognormalComponent], turns: Sequence[float], heading: float = 0.0,
                  origin: Tuple[float, float] = (0.0, 0.0), start_time: float = 0.0, tremor_amp: float = 0.0,
                  tremor_freq: float = 5.0, pressure_level: float = 0.6,
                  sample_rate: float = DEFAULT_SAMPLE_RATE, n_samples: Optional[int] = None) -> RenderedStroke:
    """
    Samples one stroke.

    :param components: lognormals in stroke time (0 = first sample)
    :param turns: direction change carried by each component, rad
    :param heading: initial direction, rad
    :param start_time: recording time of the first sample
    :return: channels in recording time; ``components`` shifted to recording time
    """
    if len(turns) != len(components):
        raise ValueError(f"{len(components)} components but {len(turns)} turns")
    n = n_samples or int(np.ceil(stroke_duration(components) * sample_rate)) + 1
    local = np.arange(n) / sample_rate
    t = start_time + local

    speed = tremor_term(t, tremor_amp, tremor_freq)
    angle = np.full(n, float(heading))
    for c, turn in zip(components, turns):
        speed = speed + lognormal_eval(c, local)
        angle = angle + turn * lognorm.cdf(local - c.t0, s=c.sigma, scale=np.exp(c.mu))

    x = origin[0] + cumulative_trapezoid(speed * np.cos(angle), local, initial=0.0)
    y = origin[1] + cumulative_trapezoid(speed * np.sin(angle), local, initial=0.0)
    p = pressure_level * (PRESSURE_FLOOR + (1.0 - PRESSURE_FLOOR) * tukey(n, alpha=0.3))
    return RenderedStroke(t=t, x=x, y=y, p=p, speed=speed,
                          components=[c.shifted(start_time) for c in components])


def sample_components(profile: SubjectProfile, script: StrokeScript, rng: np.random.Generator
                      ) -> List[LognormalComponent]:
    """
    Components of one stroke in stroke time. More components split the same
    path and duration into more, overlapping submovements.
    """
    n = 1 + int(rng.poisson(profile.lognormals_per_stroke - 1.0))
    span = rng.uniform(*STROKE_SPAN) / profile.speed_scale
    spacing = span / n
    path = rng.uniform(*STROKE_PATH_MM) * script.path_scale
    components = []
    for k in range(n):
        t0 = 0.0 if k == 0 else k * spacing * (1.0 + rng.uniform(-0.15, 0.15))
        mu = rng.normal(MU_MEAN, MU_STD) - np.log(profile.speed_scale)
        sigma = float(np.clip(rng.normal(SIGMA_MEAN, profile.sigma_jitter), *SIGMA_RANGE))
        D = path / n * rng.uniform(0.7, 1.3)
        components.append(LognormalComponent(D=float(D), t0=float(t0), mu=float(mu), sigma=sigma))
    return components


def synth_task(profile: SubjectProfile, task: TaskId, seed: Seed, subject_id: str = "S000",
               sample_rate: float = DEFAULT_SAMPLE_RATE, min_pen_down: float = MIN_PEN_DOWN_S
               ) -> Tuple[TaskRecording, GroundTruth]:
    """
    One synthetic recording of a task: strokes from the task's angle script
    repeated until ``min_pen_down`` seconds of writing, separated by pen-up
    gaps of in-air movement. All randomness comes from ``seed``.

    :raises InvalidProfile: the profile is outside its domain
    """
    profile.check()
    task = TaskId(task)
    rng = np.random.default_rng(seed)
    scripts = task_script(task)

    channels: List[Tuple[np.ndarray, ...]] = []
    truths: List[StrokeTruth] = []
    index, pen_down_time = 0, 0.0
    position = ORIGIN_MM
    while pen_down_time < min_pen_down and len(truths) < MAX_STROKES:
        if truths:
            gap = max(2, int(round(BASE_PAUSE_S * profile.pause_scale * rng.uniform(0.8, 1.2) * sample_rate)))
            target = (position[0] + rng.uniform(2.0, 6.0), position[1] + rng.uniform(-2.0, 2.0))
            frac = np.arange(1, gap + 1) / (gap + 1)
            channels.append((
                (index + np.arange(gap)) / sample_rate,
                position[0] + frac * (target[0] - position[0]),
                position[1] + frac * (target[1] - position[1]),
                np.zeros(gap),
                np.zeros(gap, dtype=bool),
            ))
            index += gap
            position = target

        script = scripts[len(truths) % len(scripts)]
        components = sample_components(profile, script, rng)
        turns = component_turns(script, len(components), rng)
        stroke = render_stroke(components, turns, heading=script.heading + rng.normal(0.0, 0.05),
                               origin=position, start_time=index / sample_rate, tremor_amp=profile.tremor_amp,
                               tremor_freq=profile.tremor_freq, pressure_level=profile.pressure_level,
                               sample_rate=sample_rate)
        n = len(stroke.t)
        channels.append((stroke.t, stroke.x, stroke.y, stroke.p, np.ones(n, dtype=bool)))
        truths.append(StrokeTruth(
            start_index=index, stop_index=index + n, start_time=float(stroke.t[0]),
            path_length=stroke.path_length,
            components=[ComponentTruth(D=c.D, t0=c.t0, mu=c.mu, sigma=c.sigma) for c in stroke.components],
        ))
        index += n
        pen_down_time += n / sample_rate
        position = (float(stroke.x[-1]), float(stroke.y[-1]))

    t, x, y, p, pen_down = (np.concatenate(parts) for parts in zip(*channels))
    # re-derive times from sample indices so they are exactly uniform
    t = np.arange(len(t)) / sample_rate
    rec = TaskRecording(subject_id=subject_id, group=profile.group, task=task, t=t, x=x, y=y, p=p,
                        pen_down=pen_down, sample_rate_hz=sample_rate)
    truth = GroundTruth(subject_id=subject_id, group=profile.group, task=task, profile=profile, strokes=truths)
    logger.debug(f"{subject_id}/{task.value}: {len(truths)} strokes, {len(t)} samples")
    return rec, truth
