"""
Invariants of a reconstructed attractor: correlation dimension (pair counting)
and the largest Lyapunov exponent (nearest-neighbour divergence).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.stats import linregress
from sklearn.neighbors import KDTree

from hwpd.errors import NoScalingRegion, TooFewPoints

logger = logging.getLogger(__name__)

MIN_D2_POINTS = 500
MIN_LYAPUNOV_POINTS = 1000
MIN_WINDOW = 6
STRICT_R2 = 0.98
LOOSE_R2 = 0.9
# the slope of a scaling window may drift by at most this fraction across the window
SLOPE_SPREAD = 0.06
# the two halves of a divergence window may differ in slope by at most this fraction
HALF_SLOPE_SPREAD = 0.1
MAX_DIVERGENCE_STEPS = 500
DIVERGENCE_FRACTION = 10
# a divergence curve spanning less than this many nats never separates its neighbours
FLAT_DIVERGENCE = 0.1
PERCENTILE_SAMPLE = 2000
BLOCK_ROWS = 256


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r2: float
    start: int
    stop: int


def _fit(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    res = linregress(x, y)
    return float(res.slope), float(res.intercept), float(res.rvalue ** 2)


def _is_linear(x: np.ndarray, y: np.ndarray, slope: float) -> bool:
    curvature = np.polyfit(x, y, 2)[0]
    drift = abs(2.0 * curvature * (x[-1] - x[0]))
    return bool(slope > 0 and drift <= SLOPE_SPREAD * slope)


def _windows(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Every window [start, stop) of at least MIN_WINDOW points, ordered by start."""
    return np.triu_indices(n + 1, k=MIN_WINDOW)


def _window_fits(x: np.ndarray, y: np.ndarray, start: np.ndarray,
                 stop: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares lines of y on x over many windows at once, from prefix sums."""
    x0, y0 = float(np.mean(x)), float(np.mean(y))
    xc, yc = x - x0, y - y0

    def window_sum(v: np.ndarray) -> np.ndarray:
        prefix = np.concatenate([[0.0], np.cumsum(v)])
        return prefix[stop] - prefix[start]

    n = (stop - start).astype(float)
    mx, my = window_sum(xc) / n, window_sum(yc) / n
    vxx = window_sum(xc * xc) - n * mx * mx
    vyy = window_sum(yc * yc) - n * my * my
    vxy = window_sum(xc * yc) - n * mx * my
    slope = vxy / vxx
    intercept = my - slope * mx + y0 - slope * x0
    floor = 1e-12 * max(float(np.sum(yc * yc)), np.finfo(float).tiny)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(vyy > floor, vxy * vxy / (vxx * vyy), 0.0)
    return slope, intercept, np.clip(r2, 0.0, 1.0)


def _longest(start: np.ndarray, stop: np.ndarray, slope: np.ndarray, intercept: np.ndarray, r2: np.ndarray,
             accepted: np.ndarray) -> Optional[ScalingFit]:
    """The longest accepted window; among equally long ones the best R^2, then the earliest."""
    candidates = np.flatnonzero(accepted)
    if len(candidates) == 0:
        return None
    length = stop[candidates] - start[candidates]
    candidates = candidates[length == length.max()]
    i = candidates[np.argmax(r2[candidates])]
    return ScalingFit(float(slope[i]), float(intercept[i]), float(r2[i]), int(start[i]), int(stop[i]))


def _relaxed_window(x: np.ndarray, y: np.ndarray, positive: bool = False) -> ScalingFit:
    """The longest window with R^2 >= 0.9 (and a positive slope if asked)."""
    start, stop = _windows(len(x))
    slope, intercept, r2 = _window_fits(x, y, start, stop)
    accepted = r2 >= LOOSE_R2
    if positive:
        accepted &= slope > 0
    best = _longest(start, stop, slope, intercept, r2, accepted)
    if best is None:
        raise NoScalingRegion(f"no window of {len(x)} points reaches R^2 >= {LOOSE_R2}")
    logger.debug(f"Scaling region accepted with relaxed R^2={best.r2:.3f}")
    return best


def fit_scaling_region(log_r: np.ndarray, log_c: np.ndarray) -> ScalingFit:
    """
    Selects the scaling region of a log-log curve.

    The earliest window of at least 6 points whose fit has R^2 >= 0.98 and
    whose slope drifts by at most 6% across it is extended as far as it stays
    linear. Failing that, the longest window with R^2 >= 0.9 is used.
    """
    n = len(log_r)
    if n < MIN_WINDOW:
        raise NoScalingRegion(f"only {n} usable radii")

    for start in range(0, n - MIN_WINDOW + 1):
        stop = start + MIN_WINDOW
        slope, intercept, r2 = _fit(log_r[start:stop], log_c[start:stop])
        if r2 < STRICT_R2 or not _is_linear(log_r[start:stop], log_c[start:stop], slope):
            continue
        best = ScalingFit(slope, intercept, r2, start, stop)
        for stop in range(start + MIN_WINDOW + 1, n + 1):
            slope, intercept, r2 = _fit(log_r[start:stop], log_c[start:stop])
            if r2 < STRICT_R2 or not _is_linear(log_r[start:stop], log_c[start:stop], slope):
                break
            best = ScalingFit(slope, intercept, r2, start, stop)
        return best

    return _relaxed_window(log_r, log_c)


def _thin(points: np.ndarray, theiler: int, max_points: Optional[int]) -> Tuple[np.ndarray, int]:
    if max_points is None or len(points) <= max_points:
        return points, theiler
    stride = int(np.ceil(len(points) / max_points))
    return points[::stride], int(np.ceil(theiler / stride))


def correlation_sum(points: np.ndarray, theiler: int = 0, n_radii: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    """
    Correlation sum C(r) over log-spaced radii between the 1st and 50th percentile
    of pairwise distances. Pairs closer than ``theiler`` samples in time are excluded;
    counting is done block-wise with integer counts.

    :return: (radii, C(radii))
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)

    sample_stride = max(1, int(np.ceil(n / PERCENTILE_SAMPLE)))
    sample = points[::sample_stride]
    sample_dist = pdist(sample)
    ii, jj = np.triu_indices(len(sample), k=1)
    sample_dist = sample_dist[(jj - ii) * sample_stride > theiler]
    r_lo, r_hi = np.percentile(sample_dist, [1, 50])
    if r_lo <= 0:
        positive = sample_dist[sample_dist > 0]
        if len(positive) == 0:
            raise NoScalingRegion("all points coincide")
        r_lo = float(positive.min())
    if r_hi <= r_lo:
        raise NoScalingRegion("pairwise distances do not span a range")
    radii = np.logspace(np.log10(r_lo), np.log10(r_hi), n_radii)

    counts = np.zeros(n_radii + 1, dtype=np.int64)
    n_pairs = 0
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        first_col = start + theiler + 1
        if first_col >= n:
            break
        d = cdist(points[start:stop], points[first_col:])
        rows = np.arange(start, stop)[:, None]
        cols = np.arange(first_col, n)[None, :]
        d = d[(cols - rows) > theiler]
        n_pairs += d.size
        counts += np.bincount(np.searchsorted(radii, d, side="right"), minlength=n_radii + 1)

    if n_pairs == 0:
        raise TooFewPoints("no point pairs outside the Theiler window")
    below = np.cumsum(counts)[:n_radii]
    return radii, below / n_pairs


def correlation_dimension(points: np.ndarray, theiler: int = 0, n_radii: int = 20,
                          max_points: Optional[int] = None) -> float:
    """
    Grassberger-Procaccia correlation dimension D2.

    :param points: phase points, shape (n, m)
    :param theiler: minimal temporal separation of counted pairs
    :param n_radii: number of log-spaced radii
    :param max_points: if set, the trajectory is uniformly thinned to at most this many points
    """
    points = np.asarray(points, dtype=float)
    if len(points) < MIN_D2_POINTS:
        raise TooFewPoints(f"correlation dimension needs {MIN_D2_POINTS} points, got {len(points)}")
    points, theiler = _thin(points, theiler, max_points)

    radii, c = correlation_sum(points, theiler, n_radii)
    valid = c > 0
    fit = fit_scaling_region(np.log(radii[valid]), np.log(c[valid]))
    logger.debug(f"D2 scaling region radii[{fit.start}:{fit.stop}], R^2={fit.r2:.4f}")
    return fit.slope



def divergence_steps(n_points: int, max_steps: int = MAX_DIVERGENCE_STEPS) -> int:
    """Length of the divergence curve: a tenth of the trajectory, at most ``max_steps``."""
    return int(min(max_steps, n_points // DIVERGENCE_FRACTION))


def divergence_curve(points: np.ndarray, theiler: int, max_steps: int = MAX_DIVERGENCE_STEPS) -> np.ndarray:
    """Mean log distance of initially nearest neighbours after k = 0..max_steps steps."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    usable = n - max_steps
    k_query = min(usable, 2 * theiler + 12)

    dist, idx = KDTree(points[:usable]).query(points[:usable], k=k_query)
    rows = np.arange(usable)[:, None]
    candidate = (np.abs(idx - rows) > theiler) & (dist > 0)
    has_neighbor = candidate.any(axis=1)
    if not np.any(has_neighbor):
        raise TooFewPoints("no neighbours outside the Theiler window")
    first = np.argmax(candidate, axis=1)
    i = np.arange(usable)[has_neighbor]
    j = idx[has_neighbor, first[has_neighbor]]

    curve = np.empty(max_steps + 1)
    for k in range(max_steps + 1):
        d = np.linalg.norm(points[i + k] - points[j + k], axis=1)
        d = d[d > 0]
        curve[k] = np.mean(np.log(d)) if len(d) else -np.inf
    return curve


def fit_divergence(curve: np.ndarray) -> ScalingFit:
    """
    Slope of the exponential-growth part of a divergence curve.

    The longest window of at least 6 steps anywhere on the curve with R^2 >= 0.98
    whose two halves agree in slope to 10% is used. Early transients and the
    saturated tail bend the curve and fail the halves check. Failing that, the
    longest window with R^2 >= 0.9 and a positive slope is used.

    :raises NoScalingRegion: if no window qualifies
    """
    steps = np.arange(len(curve), dtype=float)
    finite = np.isfinite(curve)
    steps, curve = steps[finite], curve[finite]
    n = len(curve)
    if n < MIN_WINDOW:
        raise NoScalingRegion(f"only {n} finite divergence steps")

    start, stop = _windows(n)
    slope, intercept, r2 = _window_fits(steps, curve, start, stop)
    mid = start + (stop - start) // 2
    first_half, _, _ = _window_fits(steps, curve, start, mid)
    second_half, _, _ = _window_fits(steps, curve, mid, stop)
    steady = (r2 >= STRICT_R2) & (slope > 0) & (np.abs(first_half - second_half) <= HALF_SLOPE_SPREAD * slope)
    best = _longest(start, stop, slope, intercept, r2, steady)
    if best is not None:
        return best
    return _relaxed_window(steps, curve, positive=True)


def largest_lyapunov(points: np.ndarray, sample_rate: float, theiler: int = 1,
                     max_steps: int = MAX_DIVERGENCE_STEPS) -> float:
    """
    Largest Lyapunov exponent by nearest-neighbour divergence.

    :param points: phase points, shape (n, m), at least 1000 rows
    :param sample_rate: samples per time unit; the result is per time unit
    :param theiler: neighbours closer than this many samples in time are ignored
    :param max_steps: upper bound on the length of the divergence curve
    :raises NoScalingRegion: if the curve has no linear part
    """
    points = np.asarray(points, dtype=float)
    if len(points) < MIN_LYAPUNOV_POINTS:
        raise TooFewPoints(f"Lyapunov estimate needs {MIN_LYAPUNOV_POINTS} points, got {len(points)}")
    curve = divergence_curve(points, theiler, divergence_steps(len(points), max_steps))
    finite = curve[np.isfinite(curve)]
    if len(finite) and np.ptp(finite) < FLAT_DIVERGENCE:
        logger.debug(f"Neighbours do not separate within {len(curve)} steps")
        return 0.0
    fit = fit_divergence(curve)
    logger.debug(f"Divergence fit over steps [{fit.start}, {fit.stop}) of {len(curve)}, R^2={fit.r2:.4f}")
    return fit.slope * sample_rate
