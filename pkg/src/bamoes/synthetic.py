"""Seeded synthetic series: sine, trend and AR(1) mixtures."""
import numpy as np

from .data import Series
from .rng import keyed_rng


def mixture_series(seed: int, index: int, length: int = 260, horizon: int = 24, lag: int = 6) -> Series:
    rng = keyed_rng(seed, "synthetic", index)
    t = np.arange(length, dtype=float)
    period = rng.uniform(12.0, 40.0)
    amp = rng.uniform(0.5, 2.0)
    slope = rng.uniform(-1.5, 1.5) / length
    phi = rng.uniform(0.2, 0.8)
    sigma = rng.uniform(0.1, 0.5)
    noise = np.empty(length)
    noise[0] = rng.normal(0.0, sigma)
    for i in range(1, length):
        noise[i] = phi * noise[i - 1] + rng.normal(0.0, sigma)
    values = amp * np.sin(2 * np.pi * t / period + rng.uniform(0, 2 * np.pi)) + slope * t + noise
    return Series(f"synth{index:02d}", values, horizon, lag)


def mixture_suite(seed: int = 0, count: int = 10, **kwargs) -> list:
    return [mixture_series(seed, i, **kwargs) for i in range(count)]


def write_csv(series_list, path, metadata_path=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("series_id,t,value\n")
        for s in series_list:
            for t, v in enumerate(s.values):
                fh.write(f"{s.id},{t},{float(v)!r}\n")
    if metadata_path is not None:
        with open(metadata_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("series_id,horizon,lag\n")
            for s in series_list:
                fh.write(f"{s.id},{s.horizon_h},{s.lag_k}\n")
