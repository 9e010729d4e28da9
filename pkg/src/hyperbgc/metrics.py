"""Retrieval accuracy metrics, two-sample KS test, band-ratio baseline.

Accuracy metrics are computed in log10 space, which suits variables skewed
toward small values, then exponentiated back so bias/RMSE/MAE read as
multiplicative factors (1.0 = perfect):

    r2   = 1 - sum((log m - log p)^2) / sum((log m - mean(log m))^2)
    bias = 10^mean(log p - log m)
    rmse = 10^sqrt(mean((log p - log m)^2))
    mae  = 10^mean(|log p - log m|)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov

from .grid import STANDARD_GRID

__all__ = [
    "RetrievalMetrics",
    "retrieval_metrics",
    "ks_statistic",
    "BandRatioModel",
    "fit_band_ratio",
    "predict_band_ratio",
]


@dataclass(frozen=True)
class RetrievalMetrics:
    """Log10-space accuracy scores; bias/rmse/mae are multiplicative factors."""

    r2: float
    bias: float
    rmse: float
    mae: float
    n: int
    n_excluded: int = 0

    def as_dict(self) -> dict:
        return {"r2": self.r2, "bias": self.bias, "rmse": self.rmse,
                "mae": self.mae, "n": self.n, "n_excluded": self.n_excluded}


def retrieval_metrics(predicted, measured) -> RetrievalMetrics:
    """Score predictions against measurements in log10 space.

    Pairs where either value is nonpositive are excluded (log undefined) and
    counted in ``n_excluded``. Needs at least 2 valid pairs; r2 is NaN when
    the measured logs have zero variance.
    """
    pred = np.asarray(predicted, dtype=np.float64)
    meas = np.asarray(measured, dtype=np.float64)
    if pred.shape != meas.shape or pred.ndim != 1:
        raise ValueError("predicted and measured must be 1-D arrays of equal length")
    valid = (pred > 0) & (meas > 0) & np.isfinite(pred) & np.isfinite(meas)
    n_excluded = int(np.sum(~valid))
    pred, meas = pred[valid], meas[valid]
    n = pred.size
    if n < 2:
        raise ValueError(f"need at least 2 valid pairs, got {n}")
    lp = np.log10(pred)
    lm = np.log10(meas)
    diff = lp - lm
    ss_res = float(np.sum(diff ** 2))
    ss_tot = float(np.sum((lm - lm.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    return RetrievalMetrics(
        r2=r2,
        bias=float(10.0 ** np.mean(diff)),
        rmse=float(10.0 ** np.sqrt(np.mean(diff ** 2))),
        mae=float(10.0 ** np.mean(np.abs(diff))),
        n=n,
        n_excluded=n_excluded,
    )


def ks_statistic(a, b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    D is the supremum gap between the two empirical CDFs; the p-value uses
    the asymptotic Kolmogorov distribution with the effective sample size
    n_a*n_b/(n_a+n_b), adequate for samples of 100 or more.
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n_a, n_b = a.size, b.size
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / n_a
    cdf_b = np.searchsorted(b, pooled, side="right") / n_b
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = n_a * n_b / (n_a + n_b)
    p = float(kolmogorov(np.sqrt(n_eff) * d))
    return d, p


@dataclass(frozen=True)
class BandRatioModel:
    """log10(BGC) = c0 + c1 * log10(R_rs(num)/R_rs(den)) fitted by least squares."""

    c0: float
    c1: float
    numerator_nm: float
    denominator_nm: float


def _log_ratio(rrs: np.ndarray, num_idx: int, den_idx: int) -> np.ndarray:
    num = rrs[:, num_idx]
    den = rrs[:, den_idx]
    if np.any(den <= 0) or np.any(num <= 0):
        raise ValueError("band-ratio model requires positive reflectance at both bands")
    return np.log10(num / den)


def fit_band_ratio(rrs: np.ndarray, bgc_linear: np.ndarray, numerator_nm: float,
                   denominator_nm: float, grid=None) -> BandRatioModel:
    """Least-squares fit of the log-log band-ratio model.

    `rrs` has shape (n, 301); `bgc_linear` is the target variable in linear
    units. Fails when the ratio is constant across records (slope undefined).
    """
    grid = grid or STANDARD_GRID
    rrs = np.asarray(rrs, dtype=np.float64)
    y = np.asarray(bgc_linear, dtype=np.float64)
    if rrs.shape[0] != y.shape[0] or rrs.shape[0] < 3:
        raise ValueError("need at least 3 matched training records")
    if np.any(y <= 0):
        raise ValueError("targets must be positive")
    x = _log_ratio(rrs, grid.index_of(numerator_nm), grid.index_of(denominator_nm))
    if np.ptp(x) == 0.0:
        raise ValueError("band ratio is constant across records; slope undefined")
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, np.log10(y), rcond=None)
    return BandRatioModel(c0=float(coef[0]), c1=float(coef[1]),
                          numerator_nm=numerator_nm, denominator_nm=denominator_nm)


def predict_band_ratio(model: BandRatioModel, rrs: np.ndarray, grid=None) -> np.ndarray:
    """Linear-space predictions of the fitted band-ratio model."""
    grid = grid or STANDARD_GRID
    rrs = np.atleast_2d(np.asarray(rrs, dtype=np.float64))
    x = _log_ratio(rrs, grid.index_of(model.numerator_nm),
                   grid.index_of(model.denominator_nm))
    return 10.0 ** (model.c0 + model.c1 * x)
