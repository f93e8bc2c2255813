"""Compiled kernels against the numpy fallback, and both against plain numpy."""
import numpy as np
import pytest

from truncbound import _backend

from conftest import BACKENDS, random_substochastic

needs_compiled = pytest.mark.skipif(_backend.compiled_kernels is None, reason="extension not built")


def test_fundamental_matches_dense_solve(backend):
    rng = np.random.default_rng(11)
    for n in (1, 2, 5, 17, 40):
        G = random_substochastic(rng, n, 0.9)
        N, pivots, fail = backend.fundamental(G, 1.0 - G.sum(axis=1))
        assert fail == -1
        np.testing.assert_allclose(N, np.linalg.inv(np.eye(n) - G), rtol=1e-11)


def test_fundamental_reports_zero_pivot(backend):
    G = np.array([[0.5, 0.5], [0.5, 0.5]])
    N, _, fail = backend.fundamental(G, np.zeros(2))
    assert N is None and fail == 1


def test_gth_eliminate_is_schur_complement(backend):
    rng = np.random.default_rng(5)
    n, m = 9, 4
    P = random_substochastic(rng, n, 0.97)
    M, d = P.copy(), 1.0 - P.sum(axis=1)
    _, fail = backend.gth_eliminate(M, d, m)
    assert fail == -1
    P22, P21, P12, P11 = P[:m, :m], P[:m, m:], P[m:, :m], P[m:, m:]
    expected = P11 + P12 @ np.linalg.solve(np.eye(m) - P22, P21)
    np.testing.assert_allclose(M[m:, m:], expected, rtol=1e-12)
    np.testing.assert_allclose(d[m:], 1.0 - expected.sum(axis=1), rtol=1e-9)


def test_tv_scan_first_max(backend):
    nu = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 1.0], [1.0, 0.0]])
    assert backend.tv_scan(nu, 0, 3) == (1.0, 0, 2)
    assert backend.tv_scan(nu[:1], 0, 0) == (0.0, 0, 0)


def test_scan_and_pair_arithmetic_agree(backend):
    rng = np.random.default_rng(2)
    nu = rng.dirichlet(np.ones(37), size=23)
    best, i, j = backend.tv_scan(nu, 0, 22)
    assert best == backend.half_l1(nu[i], nu[j])
    brute = max(backend.half_l1(nu[a], nu[b]) for a in range(23) for b in range(a + 1, 23))
    assert best == brute


@needs_compiled
def test_backends_bitwise_close():
    rng = np.random.default_rng(8)
    G = random_substochastic(rng, 30, 0.99)
    d = 1.0 - G.sum(axis=1)
    Nc, _, _ = _backend.compiled_kernels.fundamental(G, d)
    Np, _, _ = _backend.python_kernels.fundamental(G, d)
    np.testing.assert_allclose(Nc, Np, rtol=1e-13)
    nu = Nc / Nc.sum(axis=1, keepdims=True)
    vc = _backend.compiled_kernels.tv_scan(nu, 0, 29)
    vp = _backend.python_kernels.tv_scan(nu, 0, 29)
    assert vc[1:] == vp[1:] and vc[0] == pytest.approx(vp[0], rel=1e-14)


def test_row_blocks_cover_all_rows():
    for n in (2, 3, 10, 101):
        for parts in (1, 2, 4, 7):
            blocks = _backend.row_blocks(n, parts)
            covered = [i for a, b in blocks for i in range(a, b)]
            assert covered == list(range(n - 1))


def test_set_threads_validates():
    with pytest.raises(ValueError):
        _backend.set_threads(0)


def test_backend_names():
    assert _backend.BACKEND in {name for name, _ in BACKENDS}
