"""Empirical mode decomposition by envelope sifting."""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from hwpd.errors import NoExtrema, SeriesTooShort

logger = logging.getLogger(__name__)

MIN_EMD_LENGTH = 256
MAX_SIFTS = 10
MAX_IMFS = 10
SD_THRESHOLD = 0.3


@dataclass(frozen=True)
class Decomposition:
    imfs: List[np.ndarray]
    residual: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return np.sum(self.imfs, axis=0) + self.residual if self.imfs else self.residual.copy()


def local_extrema(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Interior indices of local maxima and minima; plateaus count once, at their first sample."""
    d = np.diff(s)
    nonzero = np.flatnonzero(d != 0)
    if len(nonzero) < 2:
        return np.array([], dtype=int), np.array([], dtype=int)
    signs = np.sign(d[nonzero])
    turns = np.flatnonzero(np.diff(signs) != 0)
    idx = nonzero[turns] + 1
    maxima = idx[signs[turns] > 0]
    minima = idx[signs[turns] < 0]
    return maxima, minima


def _envelope(s: np.ndarray, knots: np.ndarray) -> np.ndarray:
    n = len(s)
    xs = np.concatenate(([0], knots, [n - 1]))
    ys = np.concatenate(([s[knots[0]]], s[knots], [s[knots[-1]]]))
    xs, keep = np.unique(xs, return_index=True)
    return CubicSpline(xs, ys[keep])(np.arange(n))


def _sift(s: np.ndarray) -> np.ndarray:
    h = s.copy()
    for _ in range(MAX_SIFTS):
        maxima, minima = local_extrema(h)
        if len(maxima) < 2 or len(minima) < 2:
            break
        mean_env = 0.5 * (_envelope(h, maxima) + _envelope(h, minima))
        h_next = h - mean_env
        sd = np.sum((h - h_next) ** 2) / max(np.sum(h ** 2), np.finfo(float).tiny)
        h = h_next
        if sd < SD_THRESHOLD:
            break
    return h


def decompose(series) -> Decomposition:
    """
    Sifts out intrinsic mode functions until the residual has fewer than two
    interior extrema of each kind or ten IMFs have been extracted.

    :raises NoExtrema: the input itself is monotonic
    """
    s = np.asarray(series, dtype=float).ravel()
    if len(s) < MIN_EMD_LENGTH:
        raise SeriesTooShort(f"EMD needs at least {MIN_EMD_LENGTH} samples, got {len(s)}")

    imfs: List[np.ndarray] = []
    residual = s.copy()
    while len(imfs) < MAX_IMFS:
        maxima, minima = local_extrema(residual)
        if len(maxima) < 2 or len(minima) < 2:
            break
        imf = _sift(residual)
        imfs.append(imf)
        residual = residual - imf

    if not imfs:
        raise NoExtrema("series has no oscillation to decompose")
    residual = s - np.sum(imfs, axis=0)
    return Decomposition(imfs=imfs, residual=residual)


def zero_crossing_frequency(series: np.ndarray, sample_rate: float) -> float:
    """Mean frequency (Hz) estimated as half the zero-crossing rate."""
    s = np.asarray(series, dtype=float)
    signs = np.sign(s[s != 0])
    crossings = int(np.count_nonzero(np.diff(signs)))
    return crossings / (2.0 * len(s) / sample_rate)


def emd_features(series, sample_rate: float = 180.0) -> Tuple[int, float, float]:
    """
    :return: (imf_count, imf1_energy_ratio, imf1_mean_freq in Hz);
        monotonic inputs give (0, 0.0, 0.0)
    """
    try:
        dec = decompose(series)
    except NoExtrema:
        logger.debug("Monotonic series, EMD features set to zero")
        return 0, 0.0, 0.0

    s = np.asarray(series, dtype=float).ravel()
    total = float(np.sum(s ** 2))
    imf1 = dec.imfs[0]
    ratio = float(np.sum(imf1 ** 2)) / total if total > 0 else 0.0
    return len(dec.imfs), ratio, zero_crossing_frequency(imf1, sample_rate)
