"""Exact Gaussian-process regression with analytic hyperparameter gradients.

Hyperparameters live in log space (lengthscales, signal variance, noise
variance) plus an unconstrained constant mean. The flat parameter vector
used by the optimizer is ordered ``[log_lengthscales..., log_signal_var,
log_noise_var, mean_const]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import _kernels
from .errors import ContractError, SingularKernelError

FAMILIES = {"rbf": _kernels.RBF, "matern52": _kernels.MATERN52}

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class KernelSpec:
    log_lengthscales: np.ndarray
    log_signal_var: float
    log_noise_var: float
    mean_const: float = 0.0
    family: str = "rbf"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractError(f"unknown kernel family {self.family!r}")
        ls = np.atleast_1d(np.asarray(self.log_lengthscales, dtype=float)).copy()
        ls.setflags(write=False)
        object.__setattr__(self, "log_lengthscales", ls)
        with np.errstate(over="ignore", under="ignore"):
            pos = np.exp(np.r_[ls, self.log_signal_var, self.log_noise_var])
        if not (np.all(np.isfinite(pos)) and np.all(pos > 0)):
            raise ContractError("kernel hyperparameters must exponentiate to finite positive values")
        if not math.isfinite(self.mean_const):
            raise ContractError("mean_const must be finite")

    @property
    def dim(self) -> int:
        return self.log_lengthscales.shape[0]

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def signal_var(self) -> float:
        return math.exp(self.log_signal_var)

    @property
    def noise_var(self) -> float:
        return math.exp(self.log_noise_var)

    @property
    def n_params(self) -> int:
        return self.dim + 3

    def to_vector(self) -> np.ndarray:
        return np.r_[self.log_lengthscales, self.log_signal_var, self.log_noise_var, self.mean_const]

    @classmethod
    def from_vector(cls, vec, family="rbf") -> "KernelSpec":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:-3], float(vec[-3]), float(vec[-2]), float(vec[-1]), family)

    @classmethod
    def initial(cls, data: "TrainSet", family="rbf") -> "KernelSpec":
        """Scale-free starting point derived from the training data."""
        sd = data.inputs.std(axis=0)
        sd = np.where(sd > 0, sd, 1.0)
        var = float(data.targets.var())
        if not var > 0:
            var = 1.0
        return cls(np.log(sd), math.log(var), math.log(0.1 * var), float(data.targets.mean()), family)


@dataclass(frozen=True)
class TrainSet:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ContractError(f"inputs {X.shape} and targets {y.shape} disagree")
        if X.shape[0] < 1:
            raise ContractError("training set is empty")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ContractError("training set contains non-finite values")
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    def __len__(self):
        return self.targets.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class GpPosterior:
    kernel: KernelSpec
    train_inputs: np.ndarray
    chol_factor: np.ndarray
    dual_weights: np.ndarray
    jitter: float = 0.0

    def predict(self, X):
        """Vectorized posterior. Returns ``(mean, latent_var, predictive_var)`` arrays."""
        X = _as_points(X, self.kernel.dim)
        k = self.kernel
        Ks = kernel_matrix(k, X, self.train_inputs)
        mean = k.mean_const + Ks @ self.dual_weights
        v = solve_triangular(self.chol_factor, Ks.T, lower=True, check_finite=False)
        latent = np.maximum(k.signal_var - np.einsum("ij,ij->j", v, v), 0.0)
        return mean, latent, latent + k.noise_var


@dataclass(frozen=True)
class AdamState:
    params: np.ndarray
    step_count: int = 0
    first_moment: np.ndarray = field(default=None)
    second_moment: np.ndarray = field(default=None)
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        p = np.asarray(self.params, dtype=float).copy()
        object.__setattr__(self, "params", p)
        for name in ("first_moment", "second_moment"):
            m = getattr(self, name)
            m = np.zeros_like(p) if m is None else np.asarray(m, dtype=float)
            if m.shape != p.shape:
                raise ContractError(f"{name} length {m.shape} does not match params {p.shape}")
            object.__setattr__(self, name, m)


def _as_points(X, d):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :] if X.shape[0] == d else X[:, None]
    if X.ndim != 2 or X.shape[1] != d:
        raise ContractError(f"expected points of dimension {d}, got shape {X.shape}")
    return X


def kernel_eval(spec: KernelSpec, a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape[0] != spec.dim or b.shape[0] != spec.dim:
        raise ContractError(f"points of length {a.shape[0]}, {b.shape[0]} for a {spec.dim}-d kernel")
    return float(kernel_matrix(spec, a[None, :], b[None, :])[0, 0])


def kernel_matrix(spec: KernelSpec, A, B) -> np.ndarray:
    """Gram matrix ``K[i, j] = k(A[i], B[j])``."""
    A = _as_points(A, spec.dim)
    B = _as_points(B, spec.dim)
    return _kernels.gram(
        np.ascontiguousarray(A), np.ascontiguousarray(B),
        spec.lengthscales, spec.signal_var, FAMILIES[spec.family],
    )


gram_matrix = kernel_matrix


def _cholesky_with_jitter(Ky, label):
    n = Ky.shape[0]
    try:
        return np.linalg.cholesky(Ky), 0.0
    except np.linalg.LinAlgError:
        pass
    base = np.trace(Ky) / n
    for exponent in range(-10, -3):
        jitter = base * 10.0 ** exponent
        try:
            return np.linalg.cholesky(Ky + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            continue
    raise SingularKernelError(f"kernel matrix for {label} is not positive definite after maximum jitter")


def _factorize(spec: KernelSpec, data: TrainSet, label="dataset"):
    if spec.dim != data.dim:
        raise ContractError(f"kernel has {spec.dim} lengthscales but data has {data.dim} inputs")
    K = kernel_matrix(spec, data.inputs, data.inputs)
    Ky = K + spec.noise_var * np.eye(len(data))
    L, jitter = _cholesky_with_jitter(Ky, label)
    alpha = cho_solve((L, True), data.targets - spec.mean_const, check_finite=False)
    return L, alpha, jitter


def fit_exact(spec: KernelSpec, data: TrainSet, label="dataset") -> GpPosterior:
    L, alpha, jitter = _factorize(spec, data, label)
    return GpPosterior(spec, data.inputs, L, alpha, jitter)


def posterior_mean_var(gp: GpPosterior, x):
    """Posterior at one point: ``(mean, latent_var, predictive_var)``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != gp.kernel.dim:
        raise ContractError(f"point of length {x.shape[0]} for a {gp.kernel.dim}-d posterior")
    m, lv, pv = gp.predict(x[None, :])
    return float(m[0]), float(lv[0]), float(pv[0])


def _nll(L, alpha, resid):
    n = resid.shape[0]
    return 0.5 * (n * _LOG_2PI + 2.0 * np.sum(np.log(np.diag(L))) + resid @ alpha)


def log_marginal_likelihood(spec: KernelSpec, data: TrainSet) -> float:
    L, alpha, _ = _factorize(spec, data)
    return -float(_nll(L, alpha, data.targets - spec.mean_const))


def objective(spec: KernelSpec, data: TrainSet, extra_inputs=None, extra_targets=None,
              C: float = 0.0, grad: bool = True):
    """Weighted negative log-likelihood plus base-model mismatch, and its gradient.

    ``loss = (1 - C) * NLL + C * sum((m(x') - f(x'))**2)`` where ``m`` is the
    posterior mean conditioned on ``data`` only. With ``C == 0`` the
    mismatch term is skipped entirely, so the result is bitwise the
    likelihood-only objective. Cost is O(N^3) + O(L N d).
    """
    if not 0.0 <= C <= 1.0:
        raise ContractError(f"C must lie in [0, 1], got {C}")
    X, y = data.inputs, data.targets
    n = len(data)
    fam = FAMILIES[spec.family]
    ls, sf, sn = spec.lengthscales, spec.signal_var, spec.noise_var
    L, alpha, _ = _factorize(spec, data)
    nll = _nll(L, alpha, y - spec.mean_const)

    use_extra = C != 0.0 and extra_inputs is not None and len(extra_inputs) > 0
    if use_extra:
        Xp = np.ascontiguousarray(_as_points(extra_inputs, spec.dim))
        fp = np.asarray(extra_targets, dtype=float).ravel()
        Ks = _kernels.gram(Xp, X, ls, sf, fam)
        mismatch = spec.mean_const + Ks @ alpha - fp
        loss = (1.0 - C) * nll + C * float(mismatch @ mismatch)
    else:
        loss = (1.0 - C) * nll if C != 0.0 else nll
    if not grad:
        return float(loss)

    Kinv = cho_solve((L, True), np.eye(n), check_finite=False)
    Q = Kinv - np.outer(alpha, alpha)
    if not use_extra:
        g_ls, g_sf = _kernels.grad_contract(X, X, ls, sf, fam, 0.5 * Q)
        g = np.r_[g_ls, g_sf, 0.5 * sn * np.trace(Q), -np.sum(alpha)]
        if C != 0.0:
            g = (1.0 - C) * g
        return float(loss), g

    u = 2.0 * mismatch
    w = Kinv @ (Ks.T @ u)
    M_xx = (1.0 - C) * 0.5 * Q - C * np.outer(w, alpha)
    g_ls, g_sf = _kernels.grad_contract(X, X, ls, sf, fam, M_xx)
    h_ls, h_sf = _kernels.grad_contract(Xp, X, ls, sf, fam, C * np.outer(u, alpha))
    g_noise = (1.0 - C) * 0.5 * sn * np.trace(Q) - C * sn * (w @ alpha)
    g_mean = -(1.0 - C) * np.sum(alpha) + C * (np.sum(u) - np.sum(w))
    return float(loss), np.r_[g_ls + h_ls, g_sf + h_sf, g_noise, g_mean]


def loss_gradient(spec: KernelSpec, data: TrainSet, extra, C: float) -> np.ndarray:
    """Gradient of the surrogate objective over ``spec.to_vector()``."""
    Xp = None if extra is None else extra.inputs
    fp = None if extra is None else extra.base_predictions
    return objective(spec, data, Xp, fp, C, grad=True)[1]


def adam_step(state: AdamState, grad) -> AdamState:
    g = np.asarray(grad, dtype=float)
    if g.shape != state.params.shape:
        raise ContractError(f"gradient length {g.shape} does not match params {state.params.shape}")
    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    params = state.params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return AdamState(params, t, m, v, state.learning_rate, state.beta1, state.beta2, state.epsilon)
