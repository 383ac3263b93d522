import logging
from typing import Tuple

import numpy as np
from scipy.stats import linregress

from hwpd.errors import SeriesTooShort, SilentSignal, ZeroVariance
from hwpd.signals.preprocessing import lowpass

logger = logging.getLogger(__name__)

MIN_HURST_LENGTH = 512
MIN_LZ_LENGTH = 64
MIN_ENTROPY_LENGTH = 100
MIN_SNR_LENGTH = 64
SNR_FLOOR = 1e-12


def _as_series(series, min_length: int, what: str) -> np.ndarray:
    s = np.asarray(series, dtype=float).ravel()
    if len(s) < min_length:
        raise SeriesTooShort(f"{what} needs at least {min_length} samples, got {len(s)}")
    return s


def hurst_rs(series, n_sizes: int = 10, min_window: int = 16) -> float:
    """
    Hurst exponent by rescaled-range analysis over log-spaced window sizes
    between 16 and N/4.
    """
    s = _as_series(series, MIN_HURST_LENGTH, "Hurst exponent")
    if np.std(s) == 0:
        raise ZeroVariance("Hurst exponent of a constant series is undefined")

    sizes = np.unique(np.floor(np.logspace(np.log10(min_window), np.log10(len(s) // 4), n_sizes)).astype(int))
    log_sizes, log_rs = [], []
    for size in sizes:
        n_windows = len(s) // size
        windows = s[:n_windows * size].reshape(n_windows, size)
        deviations = np.cumsum(windows - windows.mean(axis=1, keepdims=True), axis=1)
        ranges = deviations.max(axis=1) - deviations.min(axis=1)
        stds = windows.std(axis=1)
        ok = stds > 0
        if not np.any(ok):
            continue
        log_sizes.append(np.log(size))
        log_rs.append(np.log(np.mean(ranges[ok] / stds[ok])))

    if len(log_sizes) < 2:
        raise ZeroVariance("every window of the series is constant")
    return float(linregress(log_sizes, log_rs).slope)


def lz76_phrase_count(bits) -> int:
    """Number of phrases of the LZ76 parsing of a binary sequence."""
    seq = [int(b) for b in bits]
    n = len(seq)
    if n < 2:
        return n
    i, k, l = 0, 1, 1
    c, k_max = 1, 1
    while True:
        if seq[i + k - 1] == seq[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > k_max:
                k_max = k
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i, k, k_max = 0, 1, 1
            else:
                k = 1
    return c


def lempel_ziv(series) -> float:
    """
    Normalized LZ76 complexity c(n) * log2(n) / n of the series binarized at its median.
    A series whose binarization is constant has complexity 0.
    """
    s = _as_series(series, MIN_LZ_LENGTH, "Lempel-Ziv complexity")
    bits = s > np.median(s)
    if bits.all() or not bits.any():
        return 0.0
    n = len(bits)
    return lz76_phrase_count(bits) * np.log2(n) / n


def entropy(series, order: int = 1, bins: int = 64) -> float:
    """
    Shannon (order 1) or Rényi (order 2, 3) entropy in bits of the amplitude histogram.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"entropy order must be 1, 2 or 3, got {order}")
    if bins < 2:
        raise ValueError("at least 2 bins are required")
    s = _as_series(series, MIN_ENTROPY_LENGTH, "entropy")

    counts, _ = np.histogram(s, bins=bins)
    p = counts[counts > 0] / counts.sum()
    if order == 1:
        return float(max(-np.sum(p * np.log2(p)), 0.0))
    return float(max(np.log2(np.sum(p ** order)) / (1 - order), 0.0))


def teager_kaiser(series) -> np.ndarray:
    """Teager-Kaiser energy: s[i]^2 - s[i-1] * s[i+1] for the interior samples."""
    s = np.asarray(series, dtype=float)
    return s[1:-1] ** 2 - s[:-2] * s[2:]


def energy_snr(series, sample_rate: float = 180.0, cutoff: float = 12.0) -> Tuple[float, float]:
    """
    Conventional and Teager-Kaiser signal-to-noise ratios in dB. The noise is
    what the low-pass filter removes; noise energies are floored at 1e-12 of the
    signal energy so clean inputs saturate at 120 dB.
    """
    s = _as_series(series, MIN_SNR_LENGTH, "SNR")
    if not np.any(s):
        raise SilentSignal("SNR of an all-zero signal is undefined")

    noise = s - lowpass(s, sample_rate, cutoff)

    signal_energy = float(np.sum(s ** 2))
    noise_energy = max(float(np.sum(noise ** 2)), SNR_FLOOR * signal_energy)
    snr_conventional = 10.0 * np.log10(signal_energy / noise_energy)

    signal_teager = abs(float(np.sum(teager_kaiser(s))))
    if signal_teager == 0:
        return float(snr_conventional), 0.0
    noise_teager = max(abs(float(np.sum(teager_kaiser(noise)))), SNR_FLOOR * signal_teager)
    snr_teager = 10.0 * np.log10(signal_teager / noise_teager)
    return float(snr_conventional), float(snr_teager)
