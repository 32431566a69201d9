"""Compare the compiled (numba) and pure-numpy kernel paths.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 7] [--n 300] [--L 4000]

Each kernel is timed on both paths with the same inputs; the script also
checks that both paths agree before reporting times. With
``BAMOES_DISABLE_NUMBA=1`` only the numpy path is timed.
"""
import argparse
import timeit

import numpy as np

from bamoes import _kernels
from bamoes._accel import NUMBA_AVAILABLE


def cases(n, L, d, rng):
    A = rng.normal(size=(L, d))
    B = rng.normal(size=(n, d))
    ls = rng.uniform(0.5, 2.0, d)
    M = rng.normal(size=(L, n))
    u, v = rng.random(100_000), rng.random(100_000)
    shocks = rng.normal(size=100_000)
    coefs = np.array([0.5, -0.2, 0.1])
    return {
        "gram rbf": (lambda k: k.gram_np, lambda k: k.gram_nb, (A, B, ls, 1.3, _kernels.RBF)),
        "gram matern52": (lambda k: k.gram_np, lambda k: k.gram_nb, (A, B, ls, 1.3, _kernels.MATERN52)),
        "grad contract rbf": (lambda k: k.grad_contract_np, lambda k: k.grad_contract_nb,
                              (A, B, ls, 1.3, _kernels.RBF, M)),
        "sbb indices": (lambda k: k.sbb_indices_np, lambda k: k.sbb_indices_nb, (u, v, 100_000, 0.9)),
        "ar regenerate": (lambda k: k.ar_regenerate_np, lambda k: k.ar_regenerate_nb,
                          (np.zeros(3), 0.1, coefs, shocks)),
    }


def best_time(fn, args, repeat):
    fn(*args)  # warm-up, triggers compilation
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--repeat", type=int, default=7)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--L", type=int, default=4000)
    p.add_argument("--d", type=int, default=3)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)

    print(f"numba available: {NUMBA_AVAILABLE}")
    print(f"{'kernel':<20} {'numpy [ms]':>12} {'numba [ms]':>12} {'speed-up':>9}")
    for name, (get_np, get_nb, call_args) in cases(args.n, args.L, args.d, rng).items():
        t_np = best_time(get_np(_kernels), call_args, args.repeat)
        if NUMBA_AVAILABLE:
            a, b = get_np(_kernels)(*call_args), get_nb(_kernels)(*call_args)
            for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
                np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12)
            t_nb = best_time(get_nb(_kernels), call_args, args.repeat)
            print(f"{name:<20} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:<20} {1e3 * t_np:12.3f} {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
