import logging
from typing import List, Tuple

import numpy as np
from scipy.signal import butter, sosfiltfilt

from hwpd.errors import DegenerateRecording
from hwpd.signals.recording import TaskRecording

logger = logging.getLogger(__name__)

MIN_RUN_SAMPLES = 4


def pen_down_runs(pen_down: np.ndarray) -> List[Tuple[int, int]]:
    """Returns [start, stop) index pairs of maximal contiguous pen-down runs."""
    padded = np.concatenate(([False], np.asarray(pen_down, dtype=bool), [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(a), int(b)) for a, b in zip(edges[0::2], edges[1::2])]


def lowpass(series: np.ndarray, sample_rate: float, cutoff: float = 12.0, order: int = 4) -> np.ndarray:
    """
    Zero-phase Butterworth low-pass.

    The straight line joining the end points is removed before filtering and
    added back afterwards, so linear segments pass unchanged.
    """
    series = np.asarray(series, dtype=float)
    n = len(series)
    if n < 3:
        return series.copy()
    sos = butter(order, cutoff / (sample_rate / 2.0), btype="low", output="sos")
    trend = np.linspace(series[0], series[-1], n)
    padlen = min(3 * (2 * len(sos) + 1), n - 1)
    return sosfiltfilt(sos, series - trend, padlen=padlen) + trend


def preprocess(rec: TaskRecording, target_rate: float = 180.0, cutoff: float = 12.0,
               filter_order: int = 4) -> TaskRecording:
    """
    Resamples pen-down runs on a uniform grid and smooths x/y.

    Grid points falling inside a pen-down run are linearly interpolated from that
    run only. Points between runs are pen-up with zero pressure; consecutive grid
    points owned by different runs get the later one turned into a pen-up sample,
    so runs never merge. Runs shorter than 4 samples are dropped.

    :param rec: a valid recording
    :param target_rate: output sampling rate, Hz
    :param cutoff: low-pass cutoff, Hz
    :return: a new recording with t starting at 0
    """
    if target_rate <= 2 * cutoff:
        raise ValueError(f"target_rate ({target_rate}) must exceed 2*cutoff ({2 * cutoff})")

    runs = [(a, b) for a, b in pen_down_runs(rec.pen_down) if b - a >= MIN_RUN_SAMPLES]
    dropped = len(pen_down_runs(rec.pen_down)) - len(runs)
    if not runs:
        raise DegenerateRecording(
            f"{rec.subject_id}/{rec.task.value}: fewer than {MIN_RUN_SAMPLES} pen-down samples in every run"
        )
    if dropped:
        logger.debug(f"{rec.subject_id}/{rec.task.value}: dropped {dropped} pen-down runs shorter than "
                     f"{MIN_RUN_SAMPLES} samples")

    t0 = rec.t[0]
    step = 1.0 / target_rate
    n_grid = int(np.floor((rec.t[-1] - t0) / step + 1e-9)) + 1
    grid = t0 + np.arange(n_grid) * step

    x = np.interp(grid, rec.t, rec.x)
    y = np.interp(grid, rec.t, rec.y)
    p = np.zeros(n_grid)
    owner = np.full(n_grid, -1, dtype=int)

    for run_id, (a, b) in enumerate(runs):
        t_run = rec.t[a:b]
        inside = np.flatnonzero((grid >= t_run[0] - 1e-9) & (grid <= t_run[-1] + 1e-9))
        if len(inside) == 0:
            continue
        g = np.clip(grid[inside], t_run[0], t_run[-1])
        owner[inside] = run_id
        x[inside] = np.interp(g, t_run, rec.x[a:b])
        y[inside] = np.interp(g, t_run, rec.y[a:b])
        p[inside] = np.interp(g, t_run, rec.p[a:b])

    # keep run boundaries when two runs own adjacent grid points
    touching = np.flatnonzero((owner[1:] >= 0) & (owner[:-1] >= 0) & (owner[1:] != owner[:-1])) + 1
    owner[touching] = -1

    pen_down = owner >= 0
    p[~pen_down] = 0.0

    padded = np.concatenate(([False], pen_down, [False]))
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    for a, b in zip(edges[0::2], edges[1::2]):
        x[a:b] = lowpass(x[a:b], target_rate, cutoff, filter_order)
        y[a:b] = lowpass(y[a:b], target_rate, cutoff, filter_order)

    azimuth = None if rec.azimuth is None else np.interp(grid, rec.t, rec.azimuth)
    altitude = None if rec.altitude is None else np.interp(grid, rec.t, rec.altitude)

    return rec.with_channels(
        t=grid - t0,
        x=x,
        y=y,
        p=np.clip(p, 0.0, 1.0),
        pen_down=pen_down,
        sample_rate_hz=target_rate,
        azimuth=azimuth,
        altitude=altitude,
    )
