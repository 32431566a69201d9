"""Calibration and accuracy metrics for Gaussian predictive distributions.

All calibration quantities are built on the probability integral transform
``PIT = Phi((y - mean) / std)`` with the one-sided convention: the observed
coverage at level ``p`` is the fraction of PIT values ``<= p``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ContractError

STD_FLOOR = 1e-12
LEVELS = np.arange(1, 100) / 100.0


def normal_interval(mean, std, alpha):
    """Central interval holding probability ``alpha`` under ``N(mean, std**2)``."""
    if not 0.0 < alpha < 1.0:
        raise ContractError(f"alpha must lie in (0, 1), got {alpha}")
    z = norm.ppf(0.5 * (1.0 + alpha))
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    return mean - z * std, mean + z * std


@dataclass(frozen=True)
class PredictionSet:
    means: np.ndarray
    stddevs: np.ndarray
    truths: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.means, dtype=float).ravel()
        sd = np.asarray(self.stddevs, dtype=float).ravel()
        y = np.asarray(self.truths, dtype=float).ravel()
        if not mu.shape == sd.shape == y.shape:
            raise ContractError(f"lengths differ: {mu.shape}, {sd.shape}, {y.shape}")
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "stddevs", np.maximum(sd, STD_FLOOR))
        object.__setattr__(self, "truths", y)

    def __len__(self):
        return self.means.shape[0]


@dataclass(frozen=True)
class CalibrationReport:
    quantile_levels: np.ndarray
    observed_coverage: np.ndarray
    miscal_area: float
    rmsce: float
    ence: float
    rmse: float


def pit_values(preds: PredictionSet) -> np.ndarray:
    return norm.cdf((preds.truths - preds.means) / preds.stddevs)


def calibration_curve(preds: PredictionSet):
    pit = np.sort(pit_values(preds))
    observed = np.searchsorted(pit, LEVELS, side="right") / max(len(pit), 1)
    return LEVELS.copy(), observed


def miscalibration_area(preds: PredictionSet) -> float:
    """Area between the empirical PIT CDF and the diagonal on [0, 1].

    The empirical CDF is a step function, so the integral is evaluated
    exactly segment by segment rather than on the quantile grid: between
    consecutive sorted PIT values the CDF equals a constant ``c`` and
    ``|c - p|`` integrates in closed form.
    """
    pit = np.sort(pit_values(preds))
    m = len(pit)
    if m == 0:
        return 0.0
    a = np.r_[0.0, pit]
    b = np.r_[pit, 1.0]
    c = np.arange(m + 1) / m  # tied PIT values give zero-length segments
    below = np.clip(c, a, b)
    area = 0.5 * ((below - a) * (2 * c - below - a) + (b - below) * (b + below - 2 * c))
    return float(np.sum(area))


def rmsce(preds: PredictionSet) -> float:
    levels, observed = calibration_curve(preds)
    return float(np.sqrt(np.mean((observed - levels) ** 2)))


def default_bins(m: int) -> int:
    return max(1, min(10, m // 5))


def ence(preds: PredictionSet, bins: int | None = None) -> float:
    m = len(preds)
    bins = default_bins(m) if bins is None else int(bins)
    if bins < 1 or bins > m:
        raise ContractError(f"cannot split {m} predictions into {bins} bins")
    order = np.argsort(preds.stddevs, kind="stable")
    var = preds.stddevs[order] ** 2
    sq_err = (preds.truths[order] - preds.means[order]) ** 2
    total = 0.0
    for idx in np.array_split(np.arange(m), bins):
        rmv = np.sqrt(var[idx].mean())
        total += abs(rmv - np.sqrt(sq_err[idx].mean())) / rmv
    return total / bins


def rmse(preds: PredictionSet) -> float:
    return float(np.sqrt(np.mean((preds.truths - preds.means) ** 2)))


def calibration_report(preds: PredictionSet, bins: int | None = None) -> CalibrationReport:
    levels, observed = calibration_curve(preds)
    return CalibrationReport(levels, observed, miscalibration_area(preds), rmsce(preds),
                             ence(preds, bins), rmse(preds))
