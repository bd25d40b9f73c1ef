# Compiled twin of pure.py. Every expression mirrors the pure backend
# (same operand order, same thresholds) so results are bit-identical.
import numpy as np

cimport numpy as cnp
from libc.math cimport HUGE_VAL
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "compiled"

cdef double _TWO_OPT_TOL = 1e-10


def tour_length(const double[:, ::1] dist, const cnp.int64_t[::1] order):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t i
    cdef double total = dist[order[n - 1], order[0]]
    for i in range(n - 1):
        total += dist[order[i], order[i + 1]]
    return total


def two_opt(const double[:, ::1] dist, const cnp.int64_t[::1] order):
    cdef Py_ssize_t n = order.shape[0]
    out = np.array(order, dtype=np.int64)
    cdef cnp.int64_t[::1] t = out
    cdef Py_ssize_t i, j, j_stop, lo, hi
    cdef cnp.int64_t a, b, c, e, tmp
    cdef double d_ab, delta
    cdef bint improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a = t[i]
            b = t[i + 1]
            d_ab = dist[a, b]
            j_stop = n if i > 0 else n - 1
            for j in range(i + 2, j_stop):
                c = t[j]
                e = t[j + 1] if j + 1 < n else t[0]
                delta = dist[a, c] + dist[b, e] - d_ab - dist[c, e]
                if delta < -_TWO_OPT_TOL:
                    lo = i + 1
                    hi = j
                    while lo < hi:
                        tmp = t[lo]
                        t[lo] = t[hi]
                        t[hi] = tmp
                        lo += 1
                        hi -= 1
                    improved = True
                    break
            if improved:
                break
    return out


def held_karp(const double[:, ::1] dist):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t size = (<Py_ssize_t>1) << m
    cdef double* dp = <double*>malloc(size * m * sizeof(double))
    if dp == NULL:
        raise MemoryError(f"held_karp: cannot allocate DP table for n={n}")
    cdef Py_ssize_t mask, pmask, base, pbase, j, k
    cdef double best, cand
    try:
        for mask in range(size * m):
            dp[mask] = HUGE_VAL
        for j in range(m):
            dp[((<Py_ssize_t>1) << j) * m + j] = dist[0, j + 1]
        for mask in range(3, size):
            if mask & (mask - 1) == 0:
                continue
            base = mask * m
            for j in range(m):
                if not (mask >> j) & 1:
                    continue
                pmask = mask ^ ((<Py_ssize_t>1) << j)
                pbase = pmask * m
                best = HUGE_VAL
                for k in range(m):
                    if not (pmask >> k) & 1:
                        continue
                    cand = dp[pbase + k] + dist[j + 1, k + 1]
                    if cand < best:
                        best = cand
                dp[base + j] = best
        base = (size - 1) * m
        best = HUGE_VAL
        for j in range(m):
            cand = dp[base + j] + dist[j + 1, 0]
            if cand < best:
                best = cand
        return best
    finally:
        free(dp)
