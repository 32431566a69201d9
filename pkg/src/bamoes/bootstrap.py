"""Time-series resampling and bootstrap-ensemble uncertainty.

Resamplers draw randomness only through ``rng.random(size)``, so any object
exposing that method (e.g. a stub replaying fixed uniforms) can drive them.

Maximum-entropy bootstrap (``resample_meb``), for a series ``x`` of length n:

1. Sort: ``xs = sort(x)``, remember the stable ordering permutation.
2. Knots: ``z[0] = xs[0] - d``, ``z[i] = (xs[i-1] + xs[i]) / 2`` for
   ``i = 1..n-1``, ``z[n] = xs[n-1] + d`` where ``d`` is the 10%-trimmed mean
   of ``|diff(x)|`` taken in time order.
3. Quantile map: ``Q`` is piecewise linear through ``(i/n, z[i])``,
   ``i = 0..n``. A uniform ``u`` falls in cell ``i = min(floor(u n), n-1)``
   and maps to ``z[i] + (u n - i) (z[i+1] - z[i])``.
4. Mean preservation: a value in cell ``i`` is shifted by
   ``target[i] - (z[i] + z[i+1]) / 2`` with ``target[0] = 0.75 xs[0] + 0.25 xs[1]``,
   ``target[n-1] = 0.25 xs[n-2] + 0.75 xs[n-1]`` and
   ``target[i] = 0.25 xs[i-1] + 0.5 xs[i] + 0.25 xs[i+1]`` otherwise. The
   interior shift is zero and the end shifts are ``+d/2`` and ``-d/2``, so
   values stay inside ``[z[0], z[n]]``.
5. Draw n uniforms, map them, sort the results and put the k-th smallest
   at the time index of the k-th smallest original value.

AR sieve bootstrap (``resample_bsap``): choose the AR order ``p <= p_max`` by
AIC on a common estimation window, refit AR(p) with intercept by least
squares, resample the centred residuals i.i.d. and regenerate the series
from the first ``p`` original values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import trim_mean

from . import _kernels
from .data import lag_featurize
from .errors import ContractError
from .gp import TrainSet
from .metrics import normal_interval
from .rng import keyed_rng

METHODS = ("naive", "sbb", "meb", "bsap")


@dataclass(frozen=True)
class BootstrapConfig:
    method: str = "naive"
    replicas_B: int = 30
    mean_block_length: float | None = None  # None means n ** (1/3)
    ar_order_max: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ContractError(f"unknown bootstrap method {self.method!r}")
        if self.replicas_B < 2:
            raise ContractError("an ensemble needs at least 2 replicas")
        if self.method == "sbb" and self.mean_block_length is not None and self.mean_block_length < 1:
            raise ContractError("mean_block_length must be at least 1")
        if self.method == "bsap" and self.ar_order_max < 1:
            raise ContractError("ar_order_max must be positive")


def _uniform_index(u, n):
    return np.minimum(np.floor(u * n).astype(np.int64), n - 1)


def resample_naive(n: int, rng) -> np.ndarray:
    return _uniform_index(np.asarray(rng.random(n), dtype=float), n)


def resample_sbb(n: int, mean_block_length: float, rng) -> np.ndarray:
    """Stationary bootstrap indices with geometric block lengths and wrap-around.

    Consumes ``n`` start uniforms then ``n`` continuation uniforms; step ``t``
    continues the current block when ``v[t] < 1 - 1/mean_block_length``.
    """
    u = np.asarray(rng.random(n), dtype=float)
    v = np.asarray(rng.random(n), dtype=float)
    p_continue = 1.0 - 1.0 / mean_block_length
    # u < 1 by contract, but a stubbed 1.0 must not index out of range
    u = np.minimum(u, np.nextafter(1.0, 0.0))
    return _kernels.sbb_indices(u, v, n, p_continue)


def resample_meb(series, rng) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    n = x.shape[0]
    if n < 3:
        raise ContractError("maximum-entropy bootstrap needs at least 3 values")
    if np.all(x == x[0]):
        return x.copy()
    order = np.argsort(x, kind="stable")
    xs = x[order]
    d = trim_mean(np.abs(np.diff(x)), 0.1)
    z = np.empty(n + 1)
    z[0] = xs[0] - d
    z[1:n] = 0.5 * (xs[:-1] + xs[1:])
    z[n] = xs[-1] + d
    target = np.empty(n)
    target[0] = 0.75 * xs[0] + 0.25 * xs[1]
    target[-1] = 0.25 * xs[-2] + 0.75 * xs[-1]
    target[1:-1] = 0.25 * xs[:-2] + 0.5 * xs[1:-1] + 0.25 * xs[2:]
    shift = target - 0.5 * (z[:-1] + z[1:])

    u = np.asarray(rng.random(n), dtype=float)
    cell = _uniform_index(u, n)
    q = z[cell] + (u * n - cell) * (z[cell + 1] - z[cell]) + shift[cell]
    out = np.empty(n)
    out[order] = np.sort(q)
    return out


def fit_ar(series, p: int):
    """Least-squares AR(p) with intercept. Returns ``(intercept, coefs, residuals)``."""
    x = np.asarray(series, dtype=float)
    X, y = lag_featurize(x, p)
    A = np.hstack([np.ones((X.shape[0], 1)), X])
    beta = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(beta[0]), beta[1:], y - A @ beta


def select_ar_order(series, p_max: int) -> int:
    x = np.asarray(series, dtype=float)
    n_eff = x.shape[0] - p_max
    best_p, best_aic = 1, math.inf
    for p in range(1, p_max + 1):
        X, y = lag_featurize(x, p)
        X, y = X[p_max - p:], y[p_max - p:]
        A = np.hstack([np.ones((n_eff, 1)), X])
        if np.linalg.matrix_rank(A) < p + 1:
            continue
        resid = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
        aic = n_eff * math.log(max(float(resid @ resid) / n_eff, 1e-300)) + 2 * (p + 1)
        if aic < best_aic:
            best_p, best_aic = p, aic
    return best_p


def resample_bsap(series, ar_order_max: int, rng) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    n = x.shape[0]
    if n < 4 * ar_order_max:
        raise ContractError(f"AR sieve with p_max={ar_order_max} needs at least {4 * ar_order_max} values")
    p = select_ar_order(x, ar_order_max)
    intercept, coefs, resid = fit_ar(x, p)
    resid = resid - resid.mean()
    shocks = resid[_uniform_index(np.asarray(rng.random(n - p), dtype=float), resid.shape[0])]
    return _kernels.ar_regenerate(np.ascontiguousarray(x[:p]), intercept,
                                  np.ascontiguousarray(coefs), shocks)


@dataclass(frozen=True)
class EnsembleUE:
    members: tuple
    residual_var: float

    def __post_init__(self):
        if len(self.members) < 2:
            raise ContractError("an ensemble needs at least 2 members")

    def predict(self, X, alpha=0.95):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        preds = np.vstack([m.predict(X) for m in self.members])
        mean = preds.mean(axis=0)
        std = np.sqrt(preds.var(axis=0, ddof=1) + self.residual_var)
        lo, hi = normal_interval(mean, std, alpha)
        return mean, std, lo, hi


def _replica_data(config, data, series, lag, rng):
    n = len(data)
    if config.method == "naive":
        idx = resample_naive(n, rng)
        return data.inputs[idx], data.targets[idx]
    if config.method == "sbb":
        block = config.mean_block_length or max(n ** (1.0 / 3.0), 1.0)
        idx = resample_sbb(n, block, rng)
        return data.inputs[idx], data.targets[idx]
    if series is None:
        raise ContractError(f"{config.method} bootstrap needs the raw series")
    if config.method == "meb":
        replica = resample_meb(series, rng)
    else:
        replica = resample_bsap(series, config.ar_order_max, rng)
    return lag_featurize(replica, lag)


def ensemble_fit(factory, data: TrainSet, config: BootstrapConfig, series=None, lag=None,
                 key=()) -> EnsembleUE:
    """Fit ``config.replicas_B`` fresh models from ``factory`` on resampled data.

    Row-resampling methods (naive, sbb) resample ``(x, y)`` pairs; series
    methods (meb, bsap) resample ``series`` and re-featurize with ``lag``.
    Replica ``b`` draws from ``keyed_rng(config.seed, *key, b)``.
    """
    if config.method in ("meb", "bsap") and lag is None:
        lag = data.dim
    members, res = [], []
    for b in range(config.replicas_B):
        rng = keyed_rng(config.seed, *key, config.method, b)
        X, y = _replica_data(config, data, series, lag, rng)
        try:
            model = factory().fit(X, y)
        except Exception as exc:
            raise RuntimeError(f"bootstrap replica {b} failed to train: {exc}") from exc
        r = y - model.predict(X)
        members.append(model)
        res.append(float(np.mean(r * r)))
    return EnsembleUE(tuple(members), float(np.mean(res)))


def ensemble_predict(ens: EnsembleUE, x, alpha=0.95):
    mean, std, lo, hi = ens.predict(np.asarray(x, dtype=float).reshape(1, -1), alpha)
    return float(mean[0]), float(std[0]), float(lo[0]), float(hi[0])
