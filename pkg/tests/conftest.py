import contextlib
import time

import numpy as np
import pytest

from bamoes import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    # compile (or load cached) numba kernels once so timing tests measure steady state
    A = np.zeros((2, 1))
    for fam in (_kernels.RBF, _kernels.MATERN52):
        _kernels.gram(A, A, np.ones(1), 1.0, fam)
        _kernels.grad_contract(A, A, np.ones(1), 1.0, fam, np.ones((2, 2)))
    _kernels.sbb_indices(np.full(3, 0.5), np.full(3, 0.5), 3, 0.5)
    _kernels.ar_regenerate(np.zeros(1), 0.0, np.zeros(1), np.zeros(2))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class StubUniform:
    """Replays a fixed list of uniforms through ``random(size)``."""

    def __init__(self, values):
        self.values = list(values)

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        if n > len(self.values):
            raise AssertionError("stub stream exhausted")
        out, self.values = self.values[:n], self.values[n:]
        return np.array(out, dtype=float).reshape(() if size is None else size)


@pytest.fixture
def stub_uniform():
    return StubUniform


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line for an acceptance criterion."""

    @contextlib.contextmanager
    def run(number, title):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            line = f"FAIL  criterion {number:>2}: {title} ({time.perf_counter() - start:.1f}s) :: " \
                   f"{str(exc).splitlines()[0] if str(exc) else type(exc).__name__}"
            request.config.stash[ACCEPTANCE].append(line)
            print(line)
            raise
        line = f"PASS  criterion {number:>2}: {title} ({time.perf_counter() - start:.1f}s)"
        request.config.stash[ACCEPTANCE].append(line)
        print(line)

    return run
