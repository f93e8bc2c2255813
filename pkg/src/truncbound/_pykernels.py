"""Pure numpy fallback for the compiled kernels in ``_ckernels.pyx``.

Same signatures and semantics; selected by ``truncbound._backend`` when the
extension is not built or ``TRUNCBOUND_BACKEND=python`` is set.
"""
import numpy as np


def gth_eliminate(M, defect, m):
    """Eliminate states ``0..m-1`` of the substochastic matrix ``M`` in place.

    Each pivot is formed as exit mass plus off-diagonal mass to the
    remaining states, never as ``1 - M[k, k]``, so no subtraction occurs
    anywhere. Returns ``(pivots, fail)`` where ``fail`` is the first state
    with a zero pivot, or -1.
    """
    n = M.shape[0]
    pivots = np.zeros(m)
    for k in range(m):
        p = defect[k] + M[k, k + 1:].sum()
        if not (p > 0.0 and np.isfinite(p)):
            return pivots, k
        pivots[k] = p
        col = M[k + 1:, k]
        nz = np.flatnonzero(col)
        if nz.size:
            f = col[nz] / p
            rows = k + 1 + nz
            defect[rows] += f * defect[k]
            M[rows, k + 1:] += np.outer(f, M[k, k + 1:])
    return pivots, -1


def fundamental(G, defect):
    """Return ``(N, pivots, fail)`` with ``N = (I - G)^-1`` built subtraction-free."""
    M = np.array(G, dtype=np.float64, order="C", copy=True)
    d = np.array(defect, dtype=np.float64, copy=True)
    n = M.shape[0]
    pivots, fail = gth_eliminate(M, d, n)
    if fail >= 0:
        return None, pivots, fail
    X = np.zeros((n, n))
    for i in range(n):
        if i:
            X[i, :i] = (M[i, :i] / pivots[:i]) @ X[:i, :i]
        X[i, i] = 1.0
    Y = X / pivots[:, None]
    N = np.zeros((n, n))
    for k in range(n - 1, -1, -1):
        N[k] = Y[k]
        if k + 1 < n:
            N[k] += (M[k, k + 1:] / pivots[k]) @ N[k + 1:]
    return N, pivots, -1


def half_l1(p, q):
    return 0.5 * float(np.abs(np.subtract(p, q)).sum())


def tv_scan(nu, i0, i1):
    """Largest half-L1 distance over pairs ``i < j`` with ``i0 <= i < i1``.

    Returns ``(value, i, j)``; ties keep the first pair in row-major order.
    The scan stops early once a pair reaches 1.0.
    """
    n = nu.shape[0]
    best, bi, bj = -1.0, 0, 0
    for i in range(i0, min(i1, n - 1)):
        vals = 0.5 * np.abs(nu[i + 1:] - nu[i]).sum(axis=1)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, bi, bj = float(vals[j]), i, i + 1 + j
            if best >= 1.0:
                break
    if best < 0.0:
        best = 0.0
    return best, bi, bj
