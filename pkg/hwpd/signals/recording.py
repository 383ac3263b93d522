"""
Recording data model and the tablet CSV format.

File header: ``t_ms,x_mm,y_mm,p,pen_state[,azimuth_rad,altitude_rad]``,
pen_state 1 = Down, 0 = Up.
"""
import io
import logging
import os
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import BinaryIO, Iterator, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from hwpd.errors import DatasetNotFound, EmptyRecording, MalformedRow, NonMonotonicTime
from hwpd.tasks import Group, TaskId

logger = logging.getLogger(__name__)

BASE_COLUMNS = ["t_ms", "x_mm", "y_mm", "p", "pen_state"]
ANGLE_COLUMNS = ["azimuth_rad", "altitude_rad"]
MANIFEST_COLUMNS = ["subject_id", "group", "age", "sex", "task", "file_path"]

DEFAULT_SAMPLE_RATE = 180.0


class PenState(IntEnum):
    Up = 0
    Down = 1


@dataclass(frozen=True)
class PenSample:
    t: float
    x: float
    y: float
    p: float
    pen_state: PenState
    azimuth: Optional[float] = None
    altitude: Optional[float] = None


@dataclass(frozen=True, eq=False)
class TaskRecording:
    """
    One task of one subject. Channels are stored column-wise; ``t`` in seconds,
    ``x``/``y`` in millimeters, ``p`` in [0, 1].
    """
    subject_id: str
    group: Group
    task: TaskId
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    pen_down: np.ndarray
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE
    azimuth: Optional[np.ndarray] = None
    altitude: Optional[np.ndarray] = None
    pressure_corrections: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("t", "x", "y", "p", "azimuth", "altitude"):
            value = getattr(self, name)
            if value is not None:
                arr = np.asarray(value, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
        pen_down = np.asarray(self.pen_down, dtype=bool)
        pen_down.setflags(write=False)
        object.__setattr__(self, "pen_down", pen_down)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) > 1 else 0.0

    def samples(self) -> Iterator[PenSample]:
        for i in range(len(self.t)):
            yield PenSample(
                t=float(self.t[i]),
                x=float(self.x[i]),
                y=float(self.y[i]),
                p=float(self.p[i]),
                pen_state=PenState.Down if self.pen_down[i] else PenState.Up,
                azimuth=None if self.azimuth is None else float(self.azimuth[i]),
                altitude=None if self.altitude is None else float(self.altitude[i]),
            )

    def with_channels(self, **channels) -> "TaskRecording":
        return replace(self, **channels)

    @classmethod
    def from_samples(cls, samples: List[PenSample], subject_id: str, group: Group, task: TaskId,
                     sample_rate_hz: float = DEFAULT_SAMPLE_RATE) -> "TaskRecording":
        has_angles = len(samples) > 0 and samples[0].azimuth is not None
        return cls(
            subject_id=subject_id,
            group=Group(group),
            task=TaskId(task),
            t=np.array([s.t for s in samples]),
            x=np.array([s.x for s in samples]),
            y=np.array([s.y for s in samples]),
            p=np.array([s.p for s in samples]),
            pen_down=np.array([s.pen_state == PenState.Down for s in samples]),
            sample_rate_hz=sample_rate_hz,
            azimuth=np.array([s.azimuth for s in samples]) if has_angles else None,
            altitude=np.array([s.altitude for s in samples]) if has_angles else None,
        )


def validate_channels(t: np.ndarray, pen_down: np.ndarray) -> None:
    if len(t) == 0:
        raise EmptyRecording("recording has no samples")
    if not np.any(pen_down):
        raise EmptyRecording("recording has no pen-down samples")
    steps = np.diff(t)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0)) + 1
        raise NonMonotonicTime(f"time does not increase at sample {bad} (t={t[bad]:.6f}s)")


def parse_recording(
        stream: Union[str, bytes, TextIO, BinaryIO],
        subject_id: str,
        group: Union[Group, str],
        task: Union[TaskId, str],
        sample_rate_hz: float = DEFAULT_SAMPLE_RATE,
) -> TaskRecording:
    """
    Parses a recording CSV.

    :param stream: a path, raw bytes or an open file object
    :param subject_id: opaque subject identifier
    :param group: subject group
    :param task: task identifier
    :param sample_rate_hz: nominal sampling rate of the tablet
    :return: a validated TaskRecording. Pen-up rows carrying pressure are
        normalized to p = 0 and counted in ``pressure_corrections``.
    """
    if isinstance(stream, bytes):
        stream = io.BytesIO(stream)
    elif isinstance(stream, str) and not os.path.exists(stream):
        raise DatasetNotFound(f"recording file not found: {stream}")

    try:
        df = pd.read_csv(stream, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyRecording("recording file is empty")
    except pd.errors.ParserError as e:
        raise MalformedRow(f"bad field count: {e}")

    columns = list(df.columns)
    if columns not in (BASE_COLUMNS, BASE_COLUMNS + ANGLE_COLUMNS):
        raise MalformedRow(f"unexpected header {columns}")
    if len(df) == 0:
        raise EmptyRecording("recording has no samples")

    values = df.apply(pd.to_numeric, errors="coerce")
    bad_rows = values.isna().any(axis=1) | (df == "").any(axis=1)
    if bad_rows.any():
        row = int(np.argmax(bad_rows.to_numpy()))
        raise MalformedRow(f"cannot parse row {row + 2}: {df.iloc[row].tolist()}")

    pen_state = values["pen_state"].to_numpy()
    if not np.all(np.isin(pen_state, (0, 1))):
        row = int(np.argmax(~np.isin(pen_state, (0, 1))))
        raise MalformedRow(f"pen_state must be 0 or 1 at row {row + 2}")
    pen_down = pen_state == 1

    t = values["t_ms"].to_numpy(dtype=float) / 1000.0
    validate_channels(t, pen_down)

    p = values["p"].to_numpy(dtype=float).copy()
    out_of_range = ~((p >= 0.0) & (p <= 1.0))
    if out_of_range.any():
        row = int(np.argmax(out_of_range))
        raise MalformedRow(f"pressure must lie in [0, 1] at row {row + 2}: {p[row]}")
    lifted_with_pressure = (~pen_down) & (p > 0)
    corrections = int(lifted_with_pressure.sum())
    if corrections:
        logger.warning(f"{subject_id}/{task}: {corrections} pen-up samples carried pressure, set to 0")
        p[lifted_with_pressure] = 0.0

    has_angles = "azimuth_rad" in values.columns
    return TaskRecording(
        subject_id=str(subject_id),
        group=Group(group),
        task=TaskId(task),
        t=t,
        x=values["x_mm"].to_numpy(dtype=float),
        y=values["y_mm"].to_numpy(dtype=float),
        p=p,
        pen_down=pen_down,
        sample_rate_hz=sample_rate_hz,
        azimuth=values["azimuth_rad"].to_numpy(dtype=float) if has_angles else None,
        altitude=values["altitude_rad"].to_numpy(dtype=float) if has_angles else None,
        pressure_corrections=corrections,
    )


def recording_to_frame(rec: TaskRecording) -> pd.DataFrame:
    df = pd.DataFrame({
        "t_ms": rec.t * 1000.0,
        "x_mm": rec.x,
        "y_mm": rec.y,
        "p": rec.p,
        "pen_state": rec.pen_down.astype(int),
    })
    if rec.azimuth is not None and rec.altitude is not None:
        df["azimuth_rad"] = rec.azimuth
        df["altitude_rad"] = rec.altitude
    return df


def write_recording(rec: TaskRecording, path: str) -> None:
    """Writes a recording in the tablet CSV format with full float precision."""
    recording_to_frame(rec).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def read_dataset_manifest(path: str) -> pd.DataFrame:
    """
    Reads the dataset manifest and resolves ``file_path`` relative to the manifest directory.
    """
    if not os.path.exists(path):
        raise DatasetNotFound(f"dataset manifest not found: {path}")

    df = pd.read_csv(path, dtype={"subject_id": str, "sex": str})
    missing = [c for c in MANIFEST_COLUMNS if c not in df.columns]
    if missing:
        raise MalformedRow(f"dataset manifest {path} lacks columns {missing}")

    for column, enum in (("group", Group), ("task", TaskId)):
        allowed = {e.value for e in enum}
        unknown = sorted(set(df[column]) - allowed)
        if unknown:
            raise MalformedRow(f"dataset manifest {path} has unknown {column} values {unknown}")

    base_dir = os.path.dirname(os.path.abspath(path))
    df["file_path"] = [
        fp if os.path.isabs(fp) else os.path.join(base_dir, fp) for fp in df["file_path"]
    ]
    return df
