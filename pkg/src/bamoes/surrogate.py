"""Gaussian-process surrogates that attach variance to a black-box regressor.

The combined model predicts with the base model and takes its variance from
a GP surrogate. The surrogate's hyperparameters are trained by Adam on a
weighted sum of the GP negative log-likelihood and the squared mismatch
between the surrogate mean and the base model at uniformly sampled design
points (``BAMOES``). Four likelihood-only baselines differ only in the data
the GP is trained and conditioned on:

========  ==========================================
SurrI     original data ``(X, y)``
SurrII    base-model relabelled data ``(X, f(X))``
SurrIII   ``(X, f(X))`` plus design points ``(X', f(X'))``
SurrIV    ``(X, y)`` plus design points ``(X', f(X'))``
========  ==========================================
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, TrainingDivergedError
from .gp import AdamState, GpPosterior, KernelSpec, TrainSet, adam_step, fit_exact, objective
from .metrics import normal_interval

log = logging.getLogger(__name__)

VARIANTS = ("BAMOES", "SurrI", "SurrII", "SurrIII", "SurrIV")


@dataclass(frozen=True)
class SurrogateConfig:
    weight_C: float = 0.7
    doe_count_L: int | None = None  # None means L = N
    epochs_M: int = 300
    learning_rate: float = 0.05
    seed: int = 0
    variant: str = "BAMOES"
    kernel_family: str = "rbf"

    def __post_init__(self):
        if not 0.0 <= self.weight_C <= 1.0:
            raise ContractError(f"weight_C must lie in [0, 1], got {self.weight_C}")
        if self.doe_count_L is not None and self.doe_count_L < 0:
            raise ContractError("doe_count_L must be nonnegative")
        if self.epochs_M < 0:
            raise ContractError("epochs_M must be nonnegative")
        if not self.learning_rate > 0:
            raise ContractError("learning_rate must be positive")
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown surrogate variant {self.variant!r}")

    def doe_size(self, n_train: int) -> int:
        return n_train if self.doe_count_L is None else int(self.doe_count_L)


@dataclass(frozen=True)
class DoeSample:
    inputs: np.ndarray
    base_predictions: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        f = np.asarray(self.base_predictions, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != f.shape[0]:
            raise ContractError(f"design inputs {X.shape} and predictions {f.shape} disagree")
        if not np.all(np.isfinite(f)):
            raise ContractError("base model returned non-finite predictions on design points")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "base_predictions", f)

    def __len__(self):
        return self.base_predictions.shape[0]


@dataclass(frozen=True)
class CombinedModel:
    base: object
    surrogate: GpPosterior
    loss_history: tuple = field(default=(), compare=False)

    def predict(self, X, alpha=0.95):
        """Base-model mean, surrogate stddev and the central ``alpha`` interval."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mean = np.asarray(self.base.predict(X), dtype=float)
        _, _, pvar = self.surrogate.predict(X)
        std = np.sqrt(pvar)
        lo, hi = normal_interval(mean, std, alpha)
        return mean, std, lo, hi


def sample_doe(train_inputs, L: int, rng) -> np.ndarray:
    """``L`` points drawn uniformly in the bounding box of ``train_inputs``."""
    X = np.atleast_2d(np.asarray(train_inputs, dtype=float))
    lo, hi = X.min(axis=0), X.max(axis=0)
    if L == 0:
        return np.empty((0, X.shape[1]))
    return lo + (hi - lo) * rng.random((int(L), X.shape[1]))


def _design(base, data: TrainSet, config: SurrogateConfig) -> DoeSample:
    rng = np.random.Generator(np.random.Philox(config.seed))
    Xp = sample_doe(data.inputs, config.doe_size(len(data)), rng)
    fp = np.asarray(base.predict(Xp), dtype=float) if len(Xp) else np.empty(0)
    return DoeSample(Xp, fp)


def bamoes_loss(spec: KernelSpec, data: TrainSet, extra: DoeSample | None, C: float) -> float:
    Xp = None if extra is None else extra.inputs
    fp = None if extra is None else extra.base_predictions
    return objective(spec, data, Xp, fp, C, grad=False)


def optimize_kernel(spec: KernelSpec, data: TrainSet, extra: DoeSample | None, C: float,
                    epochs: int, learning_rate: float):
    """Run ``epochs`` Adam steps from ``spec``. Returns the final spec and per-epoch losses."""
    Xp = None if extra is None else extra.inputs
    fp = None if extra is None else extra.base_predictions
    state = AdamState(spec.to_vector(), learning_rate=learning_rate)
    history = []
    for epoch in range(epochs):
        loss, grad = objective(spec, data, Xp, fp, C)
        if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
            raise TrainingDivergedError(epoch, loss)
        history.append(loss)
        state = adam_step(state, grad)
        try:
            spec = KernelSpec.from_vector(state.params, spec.family)
        except ContractError as exc:
            raise TrainingDivergedError(epoch, loss) from exc
    return spec, history


def train_bamoes(base, data: TrainSet, config: SurrogateConfig) -> CombinedModel:
    if config.variant != "BAMOES":
        raise ContractError(f"train_bamoes needs variant BAMOES, got {config.variant}")
    extra = _design(base, data, config)
    spec0 = KernelSpec.initial(data, config.kernel_family)
    spec, history = optimize_kernel(spec0, data, extra, config.weight_C,
                                    config.epochs_M, config.learning_rate)
    log.debug("BAMOES trained: N=%d L=%d loss %s", len(data), len(extra), history[-1:] or "n/a")
    return CombinedModel(base, fit_exact(spec, data), tuple(history))


def variant_dataset(variant: str, base, data: TrainSet, config: SurrogateConfig) -> TrainSet:
    if variant == "SurrI":
        return data
    if variant == "SurrII":
        return TrainSet(data.inputs, base.predict(data.inputs))
    extra = _design(base, data, config)
    if variant == "SurrIII":
        return TrainSet(np.vstack([data.inputs, extra.inputs]),
                        np.r_[base.predict(data.inputs), extra.base_predictions])
    if variant == "SurrIV":
        if len(extra) == 0:
            return data
        return TrainSet(np.vstack([data.inputs, extra.inputs]),
                        np.r_[data.targets, extra.base_predictions])
    raise ContractError(f"unknown baseline variant {variant!r}")


def train_variant(variant: str, base, data: TrainSet, config: SurrogateConfig) -> CombinedModel:
    """Likelihood-only surrogate trained and conditioned on the variant's dataset."""
    if variant == "BAMOES":
        raise ContractError("use train_bamoes for the BAMOES variant")
    vdata = variant_dataset(variant, base, data, config)
    spec0 = KernelSpec.initial(vdata, config.kernel_family)
    spec, history = optimize_kernel(spec0, vdata, None, 0.0, config.epochs_M, config.learning_rate)
    return CombinedModel(base, fit_exact(spec, vdata), tuple(history))


def train_surrogate(base, data: TrainSet, config: SurrogateConfig) -> CombinedModel:
    if config.variant == "BAMOES":
        return train_bamoes(base, data, config)
    return train_variant(config.variant, base, data, config)


def predict_with_uncertainty(model: CombinedModel, x, alpha: float = 0.95):
    """Single-point ``(mean, stddev, lower, upper)``."""
    mean, std, lo, hi = model.predict(np.asarray(x, dtype=float).reshape(1, -1), alpha)
    return float(mean[0]), float(std[0]), float(lo[0]), float(hi[0])
