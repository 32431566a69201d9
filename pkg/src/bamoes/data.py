"""Series ingestion, tail truncation, lag features, splitting and scaling.

Dataset CSV: header ``series_id,t,value``; ``t`` is an integer, strictly
increasing within a series. Rows of different series may interleave.
Metadata CSV: header ``series_id,horizon,lag``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParseError

MIN_KEEP = 200


@dataclass(frozen=True)
class Series:
    id: str
    values: np.ndarray
    horizon_h: int = 1
    lag_k: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise ContractError(f"series {self.id!r} has non-finite values")
        if self.horizon_h < 1 or self.lag_k < 1:
            raise ContractError(f"series {self.id!r}: horizon and lag must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    def with_values(self, values) -> "Series":
        return Series(self.id, values, self.horizon_h, self.lag_k)


def _read_rows(path, required):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("file is empty", 1) from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"missing column(s) {', '.join(missing)}", 1)
        idx = [header.index(c) for c in required]
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
            yield lineno, [row[i].strip() for i in idx]


def _parse_int(text, what, lineno):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not an integer", lineno) from None


def load_metadata(path) -> dict:
    meta = {}
    for lineno, (sid, h, k) in _read_rows(path, ("series_id", "horizon", "lag")):
        if sid in meta:
            raise ParseError(f"duplicate metadata for series {sid!r}", lineno)
        meta[sid] = (_parse_int(h, "horizon", lineno), _parse_int(k, "lag", lineno))
    return meta


def load_csv(path, metadata=None, horizon=None, lag=None) -> list[Series]:
    """Read every series in ``path``, in order of first appearance.

    ``metadata`` is a metadata CSV path or a ``{series_id: (horizon, lag)}``
    mapping; ``horizon`` and ``lag`` are fallbacks for series it omits.
    """
    if isinstance(metadata, (str, bytes)) or hasattr(metadata, "__fspath__"):
        metadata = load_metadata(metadata)
    metadata = metadata or {}
    values: dict[str, list[float]] = {}
    last_t: dict[str, int] = {}
    for lineno, (sid, t_text, v_text) in _read_rows(path, ("series_id", "t", "value")):
        t = _parse_int(t_text, "t", lineno)
        try:
            v = float(v_text)
        except ValueError:
            raise ParseError(f"value {v_text!r} is not numeric", lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"value {v_text!r} is not finite", lineno)
        if sid in last_t:
            if t == last_t[sid]:
                raise ParseError(f"duplicate (series_id, t) = ({sid!r}, {t})", lineno)
            if t < last_t[sid]:
                raise ParseError(f"t={t} is not increasing for series {sid!r}", lineno)
        else:
            values[sid] = []
        last_t[sid] = t
        values[sid].append(v)
    out = []
    for sid, vals in values.items():
        h, k = metadata.get(sid, (horizon, lag))
        if h is None or k is None:
            raise ParseError(f"no horizon/lag for series {sid!r}")
        out.append(Series(sid, vals, int(h), int(k)))
    return out


def truncate_tail(series: Series, k: int | None = None) -> Series:
    """Keep the last ``max(2k, 200)`` values of a longer series."""
    k = series.lag_k if k is None else k
    keep = max(2 * k, MIN_KEEP)
    if len(series) <= keep:
        return series
    return series.with_values(series.values[-keep:])


def lag_featurize(values, k: int):
    """Rows ``x_t = (v[t-1], ..., v[t-k])`` with target ``v[t]`` for ``t >= k``."""
    v = np.asarray(values.values if isinstance(values, Series) else values, dtype=float)
    n = v.shape[0]
    if not 1 <= k < n:
        raise ContractError(f"lag {k} needs a series longer than {k}, got {n}")
    X = np.column_stack([v[k - j - 1:n - j - 1] for j in range(k)])
    return X, v[k:].copy()


def split_train_test(series: Series):
    """Hold out the last ``h + k`` raw values; they yield ``h`` test rows."""
    h, k = series.horizon_h, series.lag_k
    n_test = h + k
    if len(series) - n_test < k + 1:
        raise ContractError(
            f"series {series.id!r} of length {len(series)} is too short for h={h}, k={k}")
    return series.with_values(series.values[:-n_test]), series.with_values(series.values[-n_test:])


@dataclass(frozen=True)
class Scaler:
    mean: float
    scale: float

    def transform(self, v):
        return (np.asarray(v, dtype=float) - self.mean) / self.scale

    def inverse_transform(self, v):
        return np.asarray(v, dtype=float) * self.scale + self.mean

    def inverse_std(self, s):
        return np.asarray(s, dtype=float) * self.scale


def standardize(train, *others):
    """Z-score every slice with the mean and stddev of ``train`` only.

    Returns ``(scaled_train, [scaled_others...], scaler)``; accepts arrays or
    :class:`Series` and returns the same kind.
    """
    tv = train.values if isinstance(train, Series) else np.asarray(train, dtype=float)
    sd = float(tv.std())
    scaler = Scaler(float(tv.mean()), sd if sd > 0 else 1.0)

    def apply(s):
        if isinstance(s, Series):
            return s.with_values(scaler.transform(s.values))
        return scaler.transform(s)

    return apply(train), [apply(o) for o in others], scaler
