"""Black-box base models.

Any object with ``fit(X, y) -> self`` and ``predict(X) -> ndarray`` can
serve as a base model. ``builtin_stddev`` is optional; the default raises
``NotImplementedError``.
"""
from __future__ import annotations

import math
import shlex
import subprocess
import threading

import numpy as np

from .errors import AdapterError, ContractError, NotFittedError, SingularDesignError


class BlackBoxModel:
    fitted = False

    def fit(self, X, y):
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def builtin_stddev(self, X) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no built-in uncertainty")

    def _check_fitted(self):
        if not self.fitted:
            raise NotFittedError(f"{type(self).__name__} used before fit")


def _augment(X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.hstack([np.ones((X.shape[0], 1)), X])


class OlsModel(BlackBoxModel):
    """Linear least squares with an intercept and a classical prediction interval."""

    def __init__(self):
        self.coefficients = None
        self.residual_var = None
        self.normal_matrix_inverse = None

    def fit(self, X, y):
        Xt = _augment(X)
        y = np.asarray(y, dtype=float).ravel()
        n, p = Xt.shape
        if n < p + 1:
            raise ContractError(f"OLS needs at least {p + 1} rows for {p - 1} features, got {n}")
        A = Xt.T @ Xt
        try:
            chol = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            try:
                chol = np.linalg.cholesky(A + 1e-8 * np.trace(A) * np.eye(p))
            except np.linalg.LinAlgError as exc:
                raise SingularDesignError("OLS design is rank deficient") from exc
        eye = np.eye(p)
        inv = np.linalg.solve(chol.T, np.linalg.solve(chol, eye))
        self.normal_matrix_inverse = 0.5 * (inv + inv.T)
        self.coefficients = self.normal_matrix_inverse @ (Xt.T @ y)
        resid = y - Xt @ self.coefficients
        self.residual_var = float(resid @ resid) / (n - p)
        self.fitted = True
        return self

    def predict(self, X):
        self._check_fitted()
        return _augment(X) @ self.coefficients

    def builtin_stddev(self, X):
        self._check_fitted()
        Xt = _augment(X)
        leverage = np.einsum("ij,jk,ik->i", Xt, self.normal_matrix_inverse, Xt)
        return np.sqrt(self.residual_var * (1.0 + leverage))


def ols_fit(X, y) -> OlsModel:
    return OlsModel().fit(X, y)


def _parse_predictions(text, expected, source):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) != expected:
        raise AdapterError(f"{source}: expected {expected} predictions, got {len(lines)}", text)
    out = np.empty(expected)
    for i, line in enumerate(lines):
        try:
            out[i] = float(line.strip())
        except ValueError:
            raise AdapterError(f"{source}: malformed prediction {line!r} on line {i + 1}", text) from None
        if not math.isfinite(out[i]):
            raise AdapterError(f"{source}: non-finite prediction on line {i + 1}", text)
    return out


class ExternalModel(BlackBoxModel):
    """Adapter for an already-trained model living outside this process.

    ``transport="subprocess"``: ``address`` is a command line. Each predict
    call starts the command, writes one comma-separated feature row per
    line to its stdin, closes stdin and reads one decimal prediction per
    line from stdout (UTF-8, LF line endings).

    ``transport="prediction_file"``: ``address`` is a text file holding one
    precomputed prediction per line, aligned with the requested rows.
    """

    def __init__(self, transport, address, timeout=60.0):
        if transport not in ("subprocess", "prediction_file"):
            raise ContractError(f"unknown transport {transport!r}")
        self.transport = transport
        self.address = address
        self.timeout = timeout
        self._lock = threading.Lock()

    def fit(self, X=None, y=None):
        self.fitted = True
        return self

    def predict(self, X):
        self._check_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.transport == "prediction_file":
            with open(self.address, encoding="utf-8") as fh:
                return _parse_predictions(fh.read(), X.shape[0], self.address)
        if X.shape[0] == 0:
            return np.empty(0)
        request = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in X)
        cmd = shlex.split(self.address) if isinstance(self.address, str) else list(self.address)
        with self._lock:
            try:
                proc = subprocess.run(cmd, input=request.encode("utf-8"), capture_output=True,
                                      timeout=self.timeout)
            except (OSError, subprocess.TimeoutExpired) as exc:
                raise AdapterError(f"external model {cmd[0]!r} failed to run: {exc}") from exc
        stdout = proc.stdout.decode("utf-8", errors="replace")
        if proc.returncode != 0:
            raise AdapterError(
                f"external model exited with status {proc.returncode}: "
                f"{proc.stderr.decode('utf-8', errors='replace').strip()}", stdout)
        return _parse_predictions(stdout, X.shape[0], cmd[0])


def external_predict(endpoint: ExternalModel, X) -> np.ndarray:
    return endpoint.fit().predict(X)
