import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from hwpd.errors import DimensionMismatch, TooFewRows

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


class StandardizationParams(BaseModel):
    """Per-feature mean and std estimated on training rows only."""
    mean: List[float]
    std: List[float]
    # subjects of the rows the fit consumed
    fitted_on: List[str] = []

    @property
    def n_features(self) -> int:
        return len(self.mean)


def fit_standardization(rows: np.ndarray, ids: Optional[Sequence[str]] = None) -> StandardizationParams:
    """
    Column means and population stds over the present (non-NaN) entries.
    Stds are floored at 1e-8; a column absent in every row gets mean 0 and std 1.

    :param ids: subjects of the rows, kept in ``fitted_on``
    """
    x = np.asarray(rows, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise TooFewRows(f"standardization needs at least 2 training rows, got {x.shape[0] if x.ndim else 0}")

    present = ~np.isnan(x)
    counts = present.sum(axis=0)
    filled = np.where(present, x, 0.0)
    mean = np.divide(filled.sum(axis=0), counts, out=np.zeros(x.shape[1]), where=counts > 0)
    sq = np.where(present, (x - mean) ** 2, 0.0)
    var = np.divide(sq.sum(axis=0), counts, out=np.ones(x.shape[1]), where=counts > 0)
    std = np.maximum(np.sqrt(var), STD_FLOOR)
    fitted_on = [str(s) for s in ids] if ids is not None else []
    if ids is not None and len(fitted_on) != x.shape[0]:
        raise DimensionMismatch(f"{len(fitted_on)} ids for {x.shape[0]} rows")
    return StandardizationParams(mean=mean.tolist(), std=std.tolist(), fitted_on=fitted_on)


def apply_standardization(rows: np.ndarray, params: StandardizationParams) -> np.ndarray:
    """z = (x - mean) / std; absent entries become 0, the training mean."""
    x = np.asarray(rows, dtype=float)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != params.n_features:
        raise DimensionMismatch(f"rows have {x.shape[1]} features, standardization was fitted on "
                                f"{params.n_features}")
    z = (x - np.asarray(params.mean)) / np.asarray(params.std)
    z[np.isnan(z)] = 0.0
    return z[0] if squeeze else z


def standardize(rows: np.ndarray, params: Optional[StandardizationParams] = None):
    """
    Fit mode (no params): fits on ``rows`` and returns (standardized rows, params).
    Apply mode: returns the rows standardized with the given params.
    """
    if params is None:
        params = fit_standardization(rows)
        return apply_standardization(rows, params), params
    return apply_standardization(rows, params)
