from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.stats import kurtosis, skew

from hwpd.errors import EmptyInput

FUNCTIONAL_NAMES = ("mean", "median", "std", "pct1", "pct99", "pct_range", "max", "min", "kurtosis", "skewness")
RANGE_FUNCTIONAL = "range"


@dataclass(frozen=True)
class FunctionalSet:
    mean: float
    median: float
    std: float
    pct1: float
    pct99: float
    pct_range: float
    max: float
    min: float
    kurtosis: float
    skewness: float
    range: Optional[float] = None

    def as_dict(self) -> Dict[str, float]:
        values = asdict(self)
        if self.range is None:
            values.pop(RANGE_FUNCTIONAL)
        return OrderedDict(values)


def functional_names(include_range: bool = False):
    return FUNCTIONAL_NAMES + ((RANGE_FUNCTIONAL,) if include_range else ())


def functionals(values: Iterable[float], include_range: bool = False) -> FunctionalSet:
    """
    The fixed statistical summary of a series. ``std`` is the population std,
    ``kurtosis`` is excess kurtosis; both higher moments are 0 when the series is constant.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    if arr.size == 0:
        raise EmptyInput("functionals need at least one value")

    pct1, median, pct99 = np.percentile(arr, [1, 50, 99])
    constant = arr.size < 2 or np.ptp(arr) == 0.0
    std = 0.0 if constant else float(np.std(arr))
    if constant:
        kurt, skewness = 0.0, 0.0
    else:
        kurt = float(kurtosis(arr, fisher=True, bias=True))
        skewness = float(skew(arr, bias=True))

    lo, hi = float(np.min(arr)), float(np.max(arr))
    return FunctionalSet(
        mean=float(np.mean(arr)),
        median=float(median),
        std=std,
        pct1=float(pct1),
        pct99=float(pct99),
        pct_range=float(pct99) - float(pct1),
        max=hi,
        min=lo,
        kurtosis=kurt,
        skewness=skewness,
        range=hi - lo if include_range else None,
    )
