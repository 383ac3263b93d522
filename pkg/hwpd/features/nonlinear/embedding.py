"""Delay embedding and the choice of its parameters (auto mutual information + false nearest neighbours)."""
import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator
from sklearn.neighbors import KDTree

from hwpd.errors import SeriesDegenerate, SeriesTooShort

logger = logging.getLogger(__name__)

MIN_SELECTION_LENGTH = 500
FNN_RATIO_TOL = 15.0
FNN_ATTRACTOR_TOL = 2.0
FNN_ACCEPTED_FRACTION = 0.01


class EmbeddingParams(BaseModel):
    tau: int
    m: int
    theiler_window: int

    @model_validator(mode="after")
    def _check(self) -> "EmbeddingParams":
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if not 2 <= self.m <= 20:
            raise ValueError(f"m must be within [2, 20], got {self.m}")
        if self.theiler_window < self.tau:
            raise ValueError(f"theiler_window ({self.theiler_window}) must be >= tau ({self.tau})")
        return self


def _embed(series: np.ndarray, tau: int, m: int) -> np.ndarray:
    n_points = len(series) - (m - 1) * tau
    return np.column_stack([series[j * tau: j * tau + n_points] for j in range(m)])


def embed_delay(series, params: EmbeddingParams) -> np.ndarray:
    """
    Reconstructs phase points: ``points[i, j] = series[i + j * tau]``.

    :return: array of shape (N - (m - 1) * tau, m)
    """
    s = np.asarray(series, dtype=float).ravel()
    if len(s) <= (params.m - 1) * params.tau + 1:
        raise SeriesTooShort(f"series of length {len(s)} is too short for m={params.m}, tau={params.tau}")
    return _embed(s, params.tau, params.m)


def auto_mutual_information(series: np.ndarray, lag: int, bins: int = 64) -> float:
    """Mutual information (nats) between the series and its copy delayed by ``lag``."""
    s = np.asarray(series, dtype=float)
    lo, hi = float(s.min()), float(s.max())
    joint, _, _ = np.histogram2d(s[:-lag], s[lag:], bins=bins, range=[[lo, hi], [lo, hi]])
    p_xy = joint / joint.sum()
    p_x = p_xy.sum(axis=1, keepdims=True)
    p_y = p_xy.sum(axis=0, keepdims=True)
    nz = p_xy > 0
    return float(np.sum(p_xy[nz] * np.log(p_xy[nz] / (p_x @ p_y)[nz])))


def _first_ami_minimum(s: np.ndarray, max_lag: int, bins: int) -> Optional[int]:
    ami = np.array([auto_mutual_information(s, lag, bins) for lag in range(1, max_lag + 1)])
    for k in range(1, len(ami) - 1):
        if ami[k] < ami[k - 1] and ami[k] <= ami[k + 1]:
            return k + 1
    return None


def _autocorrelation_lag(s: np.ndarray, max_lag: int) -> int:
    centered = s - s.mean()
    denom = float(np.dot(centered, centered))
    for lag in range(1, max_lag + 1):
        if np.dot(centered[:-lag], centered[lag:]) / denom < 1.0 / np.e:
            return lag
    return max_lag


def false_nearest_fraction(series: np.ndarray, tau: int, m: int) -> float:
    """Fraction of nearest neighbours in dimension m that separate when going to m + 1."""
    s = np.asarray(series, dtype=float)
    n_rows = len(s) - m * tau
    if n_rows < 10:
        raise SeriesTooShort(f"series too short for FNN at m={m}, tau={tau}")
    points = _embed(s, tau, m)[:n_rows]
    dist, idx = KDTree(points).query(points, k=2)
    nn_dist, nn_idx = dist[:, 1], idx[:, 1]

    valid = nn_dist > 0
    if not np.any(valid):
        return 0.0
    rows = np.arange(n_rows)[valid]
    extra = np.abs(s[rows + m * tau] - s[nn_idx[valid] + m * tau])
    r_m = nn_dist[valid]
    attractor_size = float(np.std(s))

    false_ratio = extra / r_m > FNN_RATIO_TOL
    false_size = np.sqrt(r_m ** 2 + extra ** 2) / attractor_size > FNN_ATTRACTOR_TOL
    return float(np.mean(false_ratio | false_size))


def select_embedding(series, bins: int = 64, max_dim: int = 10) -> EmbeddingParams:
    """
    Chooses tau from the first minimum of auto mutual information (falling back to
    the 1/e autocorrelation lag) and m as the smallest dimension with less than 1%
    false nearest neighbours, capped at ``max_dim``.
    """
    s = np.asarray(series, dtype=float).ravel()
    if len(s) < MIN_SELECTION_LENGTH:
        raise SeriesTooShort(f"embedding selection needs {MIN_SELECTION_LENGTH} samples, got {len(s)}")
    if np.ptp(s) == 0:
        raise SeriesDegenerate("series has zero variance")

    max_lag = max(len(s) // 10, 3)
    tau = _first_ami_minimum(s, max_lag, bins)
    if tau is None:
        tau = _autocorrelation_lag(s, max_lag)
        logger.debug(f"No AMI minimum up to lag {max_lag}, autocorrelation lag {tau} is used")

    m = max_dim
    for dim in range(1, max_dim + 1):
        if len(s) - dim * tau < 10:
            m = max(dim - 1, 2)
            break
        if false_nearest_fraction(s, tau, dim) < FNN_ACCEPTED_FRACTION:
            m = dim
            break

    return EmbeddingParams(tau=tau, m=max(m, 2), theiler_window=tau)
