"""
Sigma-Lognormal decomposition of stroke speed profiles and the neuromotor
features derived from it.

Every stroke is fitted independently in stroke-relative time with the speed
normalized by its maximum, so the decomposition is equivariant to time shifts
and amplitude scaling.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.optimize import least_squares
from scipy.stats import lognorm

from hwpd.config import NeuromotorSettings
from hwpd.errors import EmptyFit, HwpdError, InvalidParams, NoPeak, TooShort
from hwpd.signals.strokes import Stroke
from hwpd.tasks import NEUROMOTOR_SKIP_TASKS, TaskId

logger = logging.getLogger(__name__)

PREFIX = "nm"
SNR_CAP_DB = 120.0
MIN_IMPROVEMENT = 0.995
PEAK_FLOOR = 1e-6
HALF_MAX_WIDTH = 2.0 * np.sqrt(2.0 * np.log(2.0))
SIGMA_BOUNDS = (0.05, 1.0)
MU_BOUNDS = (-4.0, 1.0)
T0_LOOKBACK = 1.0
SYMMETRIC_SIGMA = 0.1
ONE_SIDED_SIGMA = 0.25
MAX_NFEV = 50

FIT_DUMP_COLUMNS = ["component_index", "D", "t0", "mu", "sigma", "t_peak", "snr_after"]

NEUROMOTOR_FEATURE_UNITS = OrderedDict([
    ("count_mean", "count"), ("count_std", "count"), ("count_max", "count"),
    ("d_mean", "mm"), ("d_std", "mm"), ("d_max", "mm"), ("d_min", "mm"),
    ("t0_offset_mean", "s"), ("t0_offset_std", "s"),
    ("mu_mean", "1"), ("mu_std", "1"), ("mu_max", "1"), ("mu_min", "1"),
    ("sigma_mean", "1"), ("sigma_std", "1"), ("sigma_max", "1"), ("sigma_min", "1"),
    ("peak_spacing_mean", "s"), ("peak_spacing_std", "s"), ("peak_spacing_min", "s"), ("peak_spacing_max", "s"),
    ("snr_mean", "dB"), ("snr_std", "dB"), ("snr_min", "dB"), ("snr_max", "dB"),
    ("lognormals_per_second", "1/s"),
    ("residual_energy_mean", "1"), ("residual_energy_max", "1"),
])

NeuromotorFeatureSet = Dict[str, Optional[float]]


@dataclass(frozen=True)
class LognormalComponent:
    D: float
    t0: float
    mu: float
    sigma: float

    @property
    def t_peak(self) -> float:
        return self.t0 + float(np.exp(self.mu - self.sigma ** 2))

    def shifted(self, dt: float) -> "LognormalComponent":
        return LognormalComponent(D=self.D, t0=self.t0 + dt, mu=self.mu, sigma=self.sigma)

    def scaled(self, a: float) -> "LognormalComponent":
        return LognormalComponent(D=self.D * a, t0=self.t0, mu=self.mu, sigma=self.sigma)


@dataclass
class SigmaLognormalFit:
    components: List[LognormalComponent]
    reconstruction_snr_db: float
    residual_energy_ratio: float
    snr_history: List[float] = field(default_factory=list)
    diverged: int = 0

    def reconstruct(self, t: np.ndarray) -> np.ndarray:
        v = np.zeros(len(t))
        for c in self.components:
            v += lognormal_eval(c, t)
        return v


def _speed(t: np.ndarray, D: float, t0: float, mu: float, sigma: float) -> np.ndarray:
    v = np.zeros(len(t))
    after = t > t0
    x = t[after] - t0
    z = (np.log(x) - mu) / sigma
    v[after] = D / (sigma * np.sqrt(2.0 * np.pi) * x) * np.exp(-0.5 * z ** 2)
    return v


def lognormal_eval(c: LognormalComponent, t) -> np.ndarray:
    """Speed of one lognormal component on a time grid; 0 for t <= t0."""
    if c.sigma <= 0 or c.D <= 0:
        raise InvalidParams(f"lognormal needs D > 0 and sigma > 0, got D={c.D}, sigma={c.sigma}")
    return _speed(np.asarray(t, dtype=float), c.D, c.t0, c.mu, c.sigma)


def _model(theta: np.ndarray, t: np.ndarray) -> np.ndarray:
    v = np.zeros(len(t))
    for D, t0, mu, sigma in theta.reshape(-1, 4):
        v += _speed(t, D, t0, mu, sigma)
    return v


def _model_jacobian(theta: np.ndarray, t: np.ndarray) -> np.ndarray:
    jac = np.zeros((len(t), len(theta)))
    for k, (D, t0, mu, sigma) in enumerate(theta.reshape(-1, 4)):
        after = t > t0
        x = t[after] - t0
        z = (np.log(x) - mu) / sigma
        v = D / (sigma * np.sqrt(2.0 * np.pi) * x) * np.exp(-0.5 * z ** 2)
        jac[after, 4 * k] = v / D
        jac[after, 4 * k + 1] = v * (1.0 + z / sigma) / x
        jac[after, 4 * k + 2] = v * z / sigma
        jac[after, 4 * k + 3] = v * (z ** 2 - 1.0) / sigma
    return jac


def _half_max_crossing(t: np.ndarray, r: np.ndarray, peak: int, lo: int, hi: int, step: int) -> Optional[float]:
    half = 0.5 * r[peak]
    i = peak
    while lo <= i + step <= hi:
        if r[i + step] <= half:
            # linear interpolation between i and i + step
            frac = (r[i] - half) / (r[i] - r[i + step])
            return float(t[i] + frac * (t[i + step] - t[i]))
        i += step
    return None


def _lobe(r: np.ndarray, peak: int) -> Tuple[int, int]:
    """Indices [a, b] of the residual lobe around a peak, bounded by local minima or sign changes."""
    a = peak
    while a > 0 and 0 < r[a - 1] <= r[a]:
        a -= 1
    b = peak
    while b < len(r) - 1 and 0 < r[b + 1] <= r[b]:
        b += 1
    return a, b


def _analytic_estimate(t: np.ndarray, r: np.ndarray, peak: int) -> LognormalComponent:
    a, b = _lobe(r, peak)
    tp = float(t[peak])
    t1 = _half_max_crossing(t, r, peak, a, b, -1)
    t2 = _half_max_crossing(t, r, peak, a, b, +1)

    t0 = None
    if t1 is not None and t2 is not None:
        denom = t1 + t2 - 2.0 * tp
        if denom > 0:
            t0 = (t1 * t2 - tp ** 2) / denom
            if t0 < t1 and t0 >= -T0_LOOKBACK:
                sigma = (np.log(t2 - t0) - np.log(t1 - t0)) / HALF_MAX_WIDTH
            else:
                t0 = None
    if t0 is None:
        if t1 is not None and t2 is not None:
            sigma, width = SYMMETRIC_SIGMA, t2 - t1
        else:
            sigma = ONE_SIDED_SIGMA
            crossing = t1 if t1 is not None else t2
            width = 2.0 * abs(crossing - tp) if crossing is not None else float(t[b] - t[a])
        width = max(width, 1e-3)
        offset = width / (2.0 * np.sinh(0.5 * sigma * HALF_MAX_WIDTH))
        t0 = tp - offset

    sigma = float(np.clip(sigma, *SIGMA_BOUNDS))
    t0 = max(t0, -T0_LOOKBACK)
    mu = float(np.clip(np.log(tp - t0) + sigma ** 2, *MU_BOUNDS))

    # amplitude from the lobe area over the lognormal mass in the same window
    window = t[a:b + 1]
    mass = lognorm.cdf(window[-1] - t0, s=sigma, scale=np.exp(mu)) - lognorm.cdf(max(window[0] - t0, 0.0),
                                                                                  s=sigma, scale=np.exp(mu))
    area = trapezoid(np.clip(r[a:b + 1], 0, None), window) if b > a else r[peak] * (t[1] - t[0])
    D = float(area / mass) if mass > 1e-9 else float(area)
    return LognormalComponent(D=max(D, 1e-9), t0=float(t0), mu=mu, sigma=sigma)


def _bounds(n: int, t_end: float) -> Tuple[np.ndarray, np.ndarray]:
    lower = np.tile([1e-9, -T0_LOOKBACK, MU_BOUNDS[0], SIGMA_BOUNDS[0]], n)
    upper = np.tile([np.inf, t_end, MU_BOUNDS[1], SIGMA_BOUNDS[1]], n)
    return lower, upper


def _as_theta(components: Sequence[LognormalComponent]) -> np.ndarray:
    return np.array([[c.D, c.t0, c.mu, c.sigma] for c in components], dtype=float).ravel()


def _as_components(theta: np.ndarray) -> List[LognormalComponent]:
    return [LognormalComponent(D=float(D), t0=float(t0), mu=float(mu), sigma=float(s))
            for D, t0, mu, s in theta.reshape(-1, 4)]


def _refine(components: List[LognormalComponent], t: np.ndarray, target: np.ndarray,
            t_end: float) -> Optional[List[LognormalComponent]]:
    lower, upper = _bounds(len(components), t_end)
    theta0 = np.clip(_as_theta(components), lower, np.nextafter(upper, -np.inf))
    try:
        res = least_squares(
            lambda th: _model(th, t) - target,
            theta0,
            jac=lambda th: _model_jacobian(th, t),
            bounds=(lower, upper),
            method="trf",
            max_nfev=MAX_NFEV,
            ftol=1e-12, xtol=1e-12, gtol=1e-12,
        )
    except ValueError as e:
        logger.debug(f"Lognormal refinement failed: {e}")
        return None
    if not np.all(np.isfinite(res.x)):
        return None
    return _as_components(res.x)


def _peaks_inside(components: Sequence[LognormalComponent], t_end: float) -> bool:
    return all(0.0 <= c.t_peak <= t_end for c in components)


def _snr_db(signal_energy: float, residual_energy: float) -> float:
    if residual_energy <= signal_energy * 10 ** (-SNR_CAP_DB / 10):
        return SNR_CAP_DB
    return float(10.0 * np.log10(signal_energy / residual_energy))


def extract_sigma_lognormal(t, speed, max_components: int = 12, target_snr_db: float = 25.0,
                            min_samples: int = 20) -> SigmaLognormalFit:
    """
    Greedy Sigma-Lognormal extraction.

    Each iteration estimates a lognormal analytically from the largest residual
    peak and its half-maximum crossings, refines it on its lobe and then jointly
    with the components found so far by bounded least squares. The best candidate
    is accepted only if it lowers the residual energy by at least 0.5%.

    :param t: sample times, s
    :param speed: speed magnitude at ``t``
    :return: fit with components sorted by peak time, in the time frame of ``t``
    """
    t = np.asarray(t, dtype=float)
    speed = np.asarray(speed, dtype=float)
    if len(t) < min_samples:
        raise TooShort(f"lognormal extraction needs at least {min_samples} samples, got {len(t)}")
    top = float(np.max(speed)) if len(speed) else 0.0
    if not np.isfinite(top) or top <= 0:
        raise NoPeak("speed profile has no positive peak")

    t_start = float(t[0])
    tr = t - t_start
    t_end = float(tr[-1])
    v = speed / top
    signal_energy = float(np.sum(v ** 2))

    components: List[LognormalComponent] = []
    recon = np.zeros(len(v))
    residual_energy = signal_energy
    history: List[float] = []
    diverged = 0

    while len(components) < max_components:
        r = v - recon
        peak = int(np.argmax(r))
        if r[peak] <= PEAK_FLOOR:
            break

        analytic = _analytic_estimate(tr, r, peak)
        a, b = _lobe(r, peak)
        local = _refine([analytic], tr[a:b + 1], r[a:b + 1], t_end) if b - a >= 4 else None
        joint = _refine(components + (local or [analytic]), tr, v, t_end)
        refined = [c for c in (joint, None if local is None else components + local)
                   if c is not None and _peaks_inside(c, t_end)]
        if not refined:
            diverged += 1
            logger.debug(f"Lognormal refinement rejected at component {len(components) + 1}")
        candidates = refined + ([components + [analytic]] if _peaks_inside([analytic], t_end) else [])

        best, best_energy = None, residual_energy * MIN_IMPROVEMENT
        for candidate in candidates:
            energy = float(np.sum((v - _model(_as_theta(candidate), tr)) ** 2))
            if energy <= best_energy:
                best, best_energy = candidate, energy
        if best is None:
            logger.debug(f"No component lowers the residual after {len(components)} components")
            break

        components = best
        recon = _model(_as_theta(components), tr)
        residual_energy = best_energy
        history.append(_snr_db(signal_energy, residual_energy))
        if history[-1] >= target_snr_db:
            break

    components = sorted((c.scaled(top).shifted(t_start) for c in components), key=lambda c: c.t_peak)
    snr = history[-1] if history else 0.0
    return SigmaLognormalFit(
        components=components,
        reconstruction_snr_db=snr,
        residual_energy_ratio=residual_energy / signal_energy,
        snr_history=history,
        diverged=diverged,
    )


def fit_stroke(stroke: Stroke, settings: Optional[NeuromotorSettings] = None) -> SigmaLognormalFit:
    settings = settings or NeuromotorSettings()
    return extract_sigma_lognormal(stroke.t, stroke.speed, settings.max_components, settings.target_snr_db,
                                   settings.min_fit_samples)


def fit_strokes(strokes: Sequence[Stroke], settings: Optional[NeuromotorSettings] = None
                ) -> List[Tuple[Stroke, SigmaLognormalFit]]:
    """Fits every stroke; strokes that cannot be fitted are skipped."""
    fits = []
    for stroke in strokes:
        try:
            fits.append((stroke, fit_stroke(stroke, settings)))
        except (NoPeak, TooShort) as e:
            logger.debug(f"Stroke {stroke.index} of {stroke.task.value} skipped: {type(e).__name__}: {e}")
    return fits


def _stats(values: Sequence[float], *which: str) -> List[float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return [0.0] * len(which)
    funcs = {"mean": np.mean, "std": np.std, "max": np.max, "min": np.min}
    return [float(funcs[w](arr)) for w in which]


def feature_name(name: str) -> str:
    return f"{PREFIX}.{name}"


def neuromotor_feature_names() -> List[str]:
    return [feature_name(n) for n in NEUROMOTOR_FEATURE_UNITS]


def neuromotor_features(fits: Sequence[Tuple[Stroke, SigmaLognormalFit]], pen_down_duration: float
                        ) -> NeuromotorFeatureSet:
    """
    The 28 neuromotor statistics over all components of all stroke fits.

    :param fits: (stroke, fit) pairs; a stroke's start time is the origin of its t0 offsets
    :param pen_down_duration: total pen-down time of the task, s
    """
    if not fits:
        raise EmptyFit("no stroke fit to summarize")

    counts = [len(f.components) for _, f in fits]
    comps = [(s, c) for s, f in fits for c in f.components]
    spacings = [b.t_peak - a.t_peak for _, f in fits for a, b in zip(f.components, f.components[1:])]
    snrs = [f.reconstruction_snr_db for _, f in fits]
    residuals = [f.residual_energy_ratio for _, f in fits]

    values = []
    values += _stats(counts, "mean", "std", "max")
    values += _stats([c.D for _, c in comps], "mean", "std", "max", "min")
    values += _stats([c.t0 - float(s.t[0]) for s, c in comps], "mean", "std")
    values += _stats([c.mu for _, c in comps], "mean", "std", "max", "min")
    values += _stats([c.sigma for _, c in comps], "mean", "std", "max", "min")
    values += _stats(spacings, "mean", "std", "min", "max")
    values += _stats(snrs, "mean", "std", "min", "max")
    values.append(len(comps) / pen_down_duration if pen_down_duration > 0 else 0.0)
    values += _stats(residuals, "mean", "max")

    return OrderedDict((feature_name(n), float(v)) for n, v in zip(NEUROMOTOR_FEATURE_UNITS, values))


def absent_neuromotor_features() -> NeuromotorFeatureSet:
    return OrderedDict((n, None) for n in neuromotor_feature_names())


def task_neuromotor_features(task: TaskId, strokes: Sequence[Stroke],
                             settings: Optional[NeuromotorSettings] = None,
                             fits: Optional[Sequence[Tuple[Stroke, SigmaLognormalFit]]] = None
                             ) -> NeuromotorFeatureSet:
    """Neuromotor block of a task; absent for skip-list tasks or when no stroke can be fitted."""
    if task in NEUROMOTOR_SKIP_TASKS:
        return absent_neuromotor_features()
    if fits is None:
        fits = fit_strokes(strokes, settings)
    try:
        return neuromotor_features(fits, sum(s.duration for s in strokes))
    except HwpdError as e:
        logger.warning(f"{task.value}: neuromotor features absent, {type(e).__name__}: {e}")
        return absent_neuromotor_features()


def fit_to_frame(fit: SigmaLognormalFit, stroke: Stroke) -> pd.DataFrame:
    """Fit dump rows; ``snr_after`` is the SNR of the stroke rebuilt from components 0..i in peak order."""
    speed = stroke.speed
    signal_energy = float(np.sum(speed ** 2))
    recon = np.zeros(len(speed))
    rows = []
    for i, c in enumerate(fit.components):
        recon += lognormal_eval(c, stroke.t)
        snr_after = _snr_db(signal_energy, float(np.sum((speed - recon) ** 2)))
        rows.append([i, c.D, c.t0, c.mu, c.sigma, c.t_peak, snr_after])
    return pd.DataFrame(rows, columns=FIT_DUMP_COLUMNS)


def write_fit_dump(fit: SigmaLognormalFit, stroke: Stroke, path: str) -> None:
    fit_to_frame(fit, stroke).to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
