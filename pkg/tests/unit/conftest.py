from typing import Tuple

import numpy as np
import pytest
from hypothesis import settings

from hwpd.signals.recording import TaskRecording
from hwpd.tasks import Group, TaskId

settings.register_profile("default", max_examples=50, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile("default")

RATE = 180.0


def make_recording(t, x, y, p=None, pen_down=None, task: TaskId = TaskId.Circle, subject_id: str = "S001",
                   group: Group = Group.PD, sample_rate: float = RATE) -> TaskRecording:
    t = np.asarray(t, dtype=float)
    p = np.full(len(t), 0.5) if p is None else np.asarray(p, dtype=float)
    pen_down = np.ones(len(t), dtype=bool) if pen_down is None else np.asarray(pen_down, dtype=bool)
    return TaskRecording(subject_id=subject_id, group=group, task=task, t=t, x=x, y=y, p=np.where(pen_down, p, 0.0),
                         pen_down=pen_down, sample_rate_hz=sample_rate)


def line_recording(speed: float = 50.0, duration: float = 1.0, sample_rate: float = RATE,
                   angle: float = 0.0) -> TaskRecording:
    t = np.arange(int(round(duration * sample_rate)) + 1) / sample_rate
    return make_recording(t, speed * t * np.cos(angle), speed * t * np.sin(angle), sample_rate=sample_rate)


def two_strokes(speed: float = 50.0, duration: float = 1.0, gap: float = 0.5,
                sample_rate: float = RATE) -> TaskRecording:
    """Two identical straight strokes separated by a pen-up gap."""
    n_down = int(round(duration * sample_rate)) + 1
    n_up = int(round(gap * sample_rate)) - 1
    local = np.arange(n_down) / sample_rate
    x = np.concatenate([speed * local, np.full(n_up, speed * duration), speed * local])
    y = np.concatenate([np.zeros(n_down), np.linspace(0, 10, n_up), np.full(n_down, 10.0)])
    pen_down = np.concatenate([np.ones(n_down, bool), np.zeros(n_up, bool), np.ones(n_down, bool)])
    t = np.arange(len(x)) / sample_rate
    return make_recording(t, x, y, pen_down=pen_down, sample_rate=sample_rate)


def blobs(n_per_class: int, distance: float = 4.0, std: float = 0.5, n_features: int = 2,
          seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Two Gaussian blobs centred at -distance/2 and +distance/2 on every axis."""
    rng = np.random.default_rng(seed)
    negative = rng.normal(-distance / 2, std, size=(n_per_class, n_features))
    positive = rng.normal(distance / 2, std, size=(n_per_class, n_features))
    rows = np.vstack([negative, positive])
    labels = np.array([0] * n_per_class + [1] * n_per_class)
    return rows, labels


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def conf_path(pytestconfig: pytest.Config) -> str:
    return str(pytestconfig.rootpath / "conf")
