import numpy as np
import pytest

from truncbound import _backend

BACKENDS = [("python", _backend.python_kernels)]
if _backend.compiled_kernels is not None:
    BACKENDS.insert(0, ("cython", _backend.compiled_kernels))


@pytest.fixture(params=[b[1] for b in BACKENDS], ids=[b[0] for b in BACKENDS])
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(_backend, "kernels", request.param)
    return request.param


@pytest.fixture(autouse=True)
def _reset_threads():
    yield
    _backend.set_threads(None)


def random_substochastic(rng, n, max_row_sum=0.95, density=1.0):
    """Dense random matrix with row sums drawn uniformly from (0, max_row_sum]."""
    M = rng.random((n, n))
    if density < 1.0:
        M *= rng.random((n, n)) < density
        M[np.arange(n), rng.integers(0, n, n)] += 0.1
    M /= M.sum(axis=1, keepdims=True)
    return M * rng.uniform(0.05, max_row_sum, size=(n, 1))


def random_irreducible(rng, n, density=0.3):
    """Random stochastic matrix containing a Hamiltonian cycle, hence irreducible."""
    M = rng.random((n, n)) * (rng.random((n, n)) < density)
    perm = rng.permutation(n)
    M[perm, np.roll(perm, -1)] += rng.uniform(0.1, 1.0, n)
    return M / M.sum(axis=1, keepdims=True)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collect one PASS/FAIL line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
