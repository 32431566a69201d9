"""Run every (series, method) cell of a benchmark grid."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bootstrap import ensemble_fit
from ..data import lag_featurize, load_csv, split_train_test, standardize, truncate_tail
from ..gp import TrainSet
from ..metrics import PredictionSet, calibration_report, normal_interval
from ..rng import derive_seed
from ..surrogate import train_surrogate
from .config import BenchConfig, MethodSpec

log = logging.getLogger(__name__)

METRICS = ("rmse", "miscal_area", "rmsce", "ence")


@dataclass(frozen=True)
class CellResult:
    series_id: str
    method: str
    rmse: float = float("nan")
    miscal_area: float = float("nan")
    rmsce: float = float("nan")
    ence: float = float("nan")
    status: str = "ok"
    observed_coverage: tuple = field(default=(), compare=False)
    interval_coverage: tuple = field(default=(), compare=False)  # ((alpha, picp), ...)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple
    series_ids: tuple
    methods: tuple

    def value(self, series_id, method, metric) -> float:
        for r in self.rows:
            if r.series_id == series_id and r.method == method:
                return getattr(r, metric) if r.ok else float("nan")
        raise KeyError((series_id, method))

    @property
    def failed(self) -> list:
        return [r for r in self.rows if not r.ok]


def _predict(method: MethodSpec, base, train_set, train_values, lag, X_test, seed, series_id):
    kind = method.ue_type
    if kind == "builtin":
        return base.predict(X_test), base.builtin_stddev(X_test)
    if kind == "bootstrap":
        cfg = method.bootstrap_config(seed)
        ens = ensemble_fit(method.make_base, train_set, cfg, series=train_values, lag=lag,
                           key=(series_id, method.name))
        mean, std, _, _ = ens.predict(X_test)
        return mean, std
    model = train_surrogate(base, train_set, method.surrogate_config(seed))
    mean, std, _, _ = model.predict(X_test)
    return mean, std


def run_cell(series, method: MethodSpec, seed: int, alpha_levels=(0.95,), ence_bins=None) -> CellResult:
    """truncate, split, scale, fit base, attach uncertainty, score the test rows."""
    try:
        s = truncate_tail(series)
        train, test = split_train_test(s)
        k = s.lag_k
        if method.standardize:
            train_v, (test_v,), scaler = standardize(train.values, test.values)
        else:
            train_v, test_v, scaler = train.values, test.values, None
        X, y = lag_featurize(train_v, k)
        X_test, _ = lag_featurize(test_v, k)
        _, y_true = lag_featurize(test.values, k)
        base = method.make_base().fit(X, y)
        cell_seed = derive_seed(seed, series.id, method.name)
        mean, std = _predict(method, base, TrainSet(X, y), train_v, k, X_test, cell_seed, series.id)
        mean, std = np.asarray(mean, dtype=float), np.asarray(std, dtype=float)
        if scaler is not None:
            mean, std = scaler.inverse_transform(mean), scaler.inverse_std(std)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise FloatingPointError("non-finite predictions")
        preds = PredictionSet(mean, std, y_true)
        rep = calibration_report(preds, ence_bins)
        coverage = []
        for a in alpha_levels:
            lo, hi = normal_interval(preds.means, preds.stddevs, a)
            coverage.append((a, float(np.mean((y_true >= lo) & (y_true <= hi)))))
        return CellResult(series.id, method.name, rep.rmse, rep.miscal_area, rep.rmsce, rep.ence,
                          "ok", tuple(rep.observed_coverage.tolist()), tuple(coverage))
    except Exception as exc:  # a failing cell never aborts the grid
        reason = f"{type(exc).__name__}: {exc}".splitlines()[0][:200]
        log.warning("cell (%s, %s) failed: %s", series.id, method.name, reason)
        return CellResult(series.id, method.name, status=f"failed: {reason}")


def _run_cell_args(args):
    return run_cell(*args)


def load_series(config: BenchConfig) -> list:
    out = []
    for d in config.datasets:
        out.extend(load_csv(d["path"], d["metadata"], config.horizon, config.lag))
    ids = [s.id for s in out]
    if len(set(ids)) != len(ids):
        raise ValueError("series ids must be unique across datasets")
    return out


def run_benchmark(config: BenchConfig, series_list=None, jobs=None) -> ResultsTable:
    series_list = load_series(config) if series_list is None else list(series_list)
    jobs = config.jobs if jobs is None else jobs
    tasks = [(s, m, config.seed, config.alpha_levels, config.ence_bins)
             for s in series_list for m in config.methods]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell_args, tasks))
    else:
        rows = [run_cell(*t) for t in tasks]
    table = ResultsTable(tuple(rows), tuple(s.id for s in series_list),
                         tuple(m.name for m in config.methods))
    if table.failed:
        log.warning("%d of %d cells failed", len(table.failed), len(rows))
    return table
