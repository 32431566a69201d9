"""Hot numeric kernels.

Each kernel exists twice: a numba-compiled loop version and a vectorized
numpy version. ``gram``, ``grad_contract``, ``sbb_indices`` and
``ar_regenerate`` at module level dispatch to the numba versions unless
numba is unavailable or disabled via ``BAMOES_DISABLE_NUMBA``. The two
paths agree to rounding error, not bitwise.

Kernel family codes: 0 = squared exponential (ARD RBF), 1 = Matern 5/2.
"""
import math

import numpy as np

from ._accel import NUMBA_AVAILABLE, njit

RBF = 0
MATERN52 = 1

_SQRT5 = math.sqrt(5.0)


# ---------------------------------------------------------------- numpy path


def _sqdist_np(A, B, lengthscales):
    sq = np.zeros((A.shape[0], B.shape[0]))
    for j in range(A.shape[1]):
        diff = (A[:, j, None] - B[None, :, j]) / lengthscales[j]
        sq += diff * diff
    return sq


def gram_np(A, B, lengthscales, signal_var, family):
    sq = _sqdist_np(A, B, lengthscales)
    if family == RBF:
        return signal_var * np.exp(-0.5 * sq)
    r = np.sqrt(sq)
    return signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * np.exp(-_SQRT5 * r)


def grad_contract_np(A, B, lengthscales, signal_var, family, M):
    """Contract ``M`` against dK/dlog(lengthscale_j) and dK/dlog(signal_var).

    Returns ``(g_ls, g_sf)`` with ``g_ls[j] = sum(M * dK/dlog l_j)`` and
    ``g_sf = sum(M * K)``.
    """
    d = A.shape[1]
    sq = _sqdist_np(A, B, lengthscales)
    if family == RBF:
        K = signal_var * np.exp(-0.5 * sq)
        F = K
    else:
        r = np.sqrt(sq)
        e = np.exp(-_SQRT5 * r)
        K = signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * e
        F = signal_var * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * e
    MF = M * F
    g_ls = np.empty(d)
    for j in range(d):
        diff = (A[:, j, None] - B[None, :, j]) / lengthscales[j]
        g_ls[j] = np.sum(MF * diff * diff)
    return g_ls, float(np.sum(M * K))


def sbb_indices_np(u, v, n, p_continue):
    # Block starts are positions where the continuation draw fails; within a
    # block the index advances by one modulo n from the block's start.
    m = u.shape[0]
    starts = np.floor(u * n).astype(np.int64)
    new_block = v >= p_continue
    new_block[0] = True
    pos = np.arange(m)
    block_start_pos = np.maximum.accumulate(np.where(new_block, pos, 0))
    return (starts[block_start_pos] + (pos - block_start_pos)) % n


def ar_regenerate_np(init, intercept, coefs, shocks):
    # The recursion is inherently sequential; this is the reference loop.
    p = coefs.shape[0]
    n = init.shape[0] + shocks.shape[0]
    out = np.empty(n)
    out[:p] = init
    for t in range(p, n):
        acc = intercept + shocks[t - p]
        for i in range(p):
            acc += coefs[i] * out[t - 1 - i]
        out[t] = acc
    return out


# ---------------------------------------------------------------- numba path


@njit
def gram_nb(A, B, lengthscales, signal_var, family):
    m, d = A.shape
    n = B.shape[0]
    K = np.empty((m, n))
    inv = 1.0 / lengthscales
    for i in range(m):
        for k in range(n):
            sq = 0.0
            for j in range(d):
                t = (A[i, j] - B[k, j]) * inv[j]
                sq += t * t
            if family == 0:
                K[i, k] = signal_var * math.exp(-0.5 * sq)
            else:
                r = math.sqrt(sq)
                K[i, k] = signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * math.exp(-_SQRT5 * r)
    return K


@njit
def grad_contract_nb(A, B, lengthscales, signal_var, family, M):
    m, d = A.shape
    n = B.shape[0]
    inv = 1.0 / lengthscales
    g_ls = np.zeros(d)
    g_sf = 0.0
    t = np.empty(d)
    for i in range(m):
        for k in range(n):
            w = M[i, k]
            if w == 0.0:
                continue
            sq = 0.0
            for j in range(d):
                t[j] = (A[i, j] - B[k, j]) * inv[j]
                sq += t[j] * t[j]
            if family == 0:
                kv = signal_var * math.exp(-0.5 * sq)
                f = kv
            else:
                r = math.sqrt(sq)
                e = math.exp(-_SQRT5 * r)
                kv = signal_var * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * e
                f = signal_var * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * e
            g_sf += w * kv
            wf = w * f
            for j in range(d):
                g_ls[j] += wf * t[j] * t[j]
    return g_ls, g_sf


@njit
def sbb_indices_nb(u, v, n, p_continue):
    m = u.shape[0]
    out = np.empty(m, dtype=np.int64)
    cur = 0
    for t in range(m):
        if t == 0 or v[t] >= p_continue:
            cur = int(math.floor(u[t] * n))
        else:
            cur = (cur + 1) % n
        out[t] = cur
    return out


@njit
def ar_regenerate_nb(init, intercept, coefs, shocks):
    p = coefs.shape[0]
    n = init.shape[0] + shocks.shape[0]
    out = np.empty(n)
    for t in range(p):
        out[t] = init[t]
    for t in range(p, n):
        acc = intercept + shocks[t - p]
        for i in range(p):
            acc += coefs[i] * out[t - 1 - i]
        out[t] = acc
    return out


if NUMBA_AVAILABLE:
    gram = gram_nb
    grad_contract = grad_contract_nb
    sbb_indices = sbb_indices_nb
    ar_regenerate = ar_regenerate_nb
else:
    gram = gram_np
    grad_contract = grad_contract_np
    sbb_indices = sbb_indices_np
    ar_regenerate = ar_regenerate_np
