# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: GTH elimination, subtraction-free inverse, TV pair scan."""
import numpy as np
from libc.math cimport fabs, isfinite


cdef Py_ssize_t _eliminate(double[:, ::1] M, double[::1] d, double[::1] piv,
                           Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double p, f, dk
    for k in range(m):
        p = d[k]
        for j in range(k + 1, n):
            p += M[k, j]
        if not (p > 0.0 and isfinite(p)):
            return k
        piv[k] = p
        dk = d[k]
        for i in range(k + 1, n):
            if M[i, k] != 0.0:
                f = M[i, k] / p
                d[i] += f * dk
                for j in range(k + 1, n):
                    M[i, j] += f * M[k, j]
    return -1


def gth_eliminate(double[:, ::1] M, double[::1] defect, Py_ssize_t m):
    pivots = np.zeros(m)
    cdef double[::1] piv = pivots
    cdef Py_ssize_t fail
    with nogil:
        fail = _eliminate(M, defect, piv, m)
    return pivots, fail


def fundamental(G, defect):
    cdef double[:, ::1] M = np.array(G, dtype=np.float64, order="C", copy=True)
    cdef double[::1] d = np.array(defect, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = M.shape[0]
    pivots = np.zeros(n)
    cdef double[::1] piv = pivots
    cdef Py_ssize_t fail, i, j, k
    cdef double f
    Xa = np.zeros((n, n))
    Na = np.zeros((n, n))
    cdef double[:, ::1] X = Xa
    cdef double[:, ::1] N = Na
    with nogil:
        fail = _eliminate(M, d, piv, n)
        if fail < 0:
            # X = L^-1, then scale rows by 1/pivot
            for i in range(n):
                X[i, i] = 1.0
                for k in range(i):
                    if M[i, k] != 0.0:
                        f = M[i, k] / piv[k]
                        for j in range(k + 1):
                            X[i, j] += f * X[k, j]
            for i in range(n):
                for j in range(i + 1):
                    X[i, j] = X[i, j] / piv[i]
            # N = (I - V)^-1 Y by back substitution
            for k in range(n - 1, -1, -1):
                for j in range(n):
                    N[k, j] = X[k, j]
                for i in range(k + 1, n):
                    if M[k, i] != 0.0:
                        f = M[k, i] / piv[k]
                        for j in range(n):
                            N[k, j] += f * N[i, j]
    if fail >= 0:
        return None, pivots, fail
    return Na, pivots, -1


cdef double _half_l1(const double[::1] p, const double[::1] q) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(p.shape[0]):
        s += fabs(p[k] - q[k])
    return 0.5 * s


def half_l1(p, q):
    cdef const double[::1] a = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(q, dtype=np.float64)
    return _half_l1(a, b)


def tv_scan(nu, Py_ssize_t i0, Py_ssize_t i1):
    cdef const double[:, ::1] V = np.ascontiguousarray(nu, dtype=np.float64)
    cdef Py_ssize_t n = V.shape[0]
    cdef Py_ssize_t i, j, bi = 0, bj = 0
    cdef double best = -1.0, val
    if i1 > n - 1:
        i1 = n - 1
    with nogil:
        for i in range(i0, i1):
            for j in range(i + 1, n):
                val = _half_l1(V[i], V[j])
                if val > best:
                    best = val
                    bi = i
                    bj = j
            if best >= 1.0:
                break
    if best < 0.0:
        best = 0.0
    return best, bi, bj
