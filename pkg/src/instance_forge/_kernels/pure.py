"""Pure-Python fallback for the hot kernels.

Must stay arithmetic-identical to the compiled backend in `_core.pyx`:
same expressions, same evaluation order, same termination thresholds, so
that a run produces bit-identical results whichever backend is active.
"""
from __future__ import annotations

import numpy as np

BACKEND = "pure"

_INF = float("inf")
_TWO_OPT_TOL = 1e-10


def tour_length(dist: np.ndarray, order: np.ndarray) -> float:
    """Closed-tour length: closing edge plus the n-1 path edges, in that order."""
    d = dist.tolist() if isinstance(dist, np.ndarray) else dist
    t = order.tolist() if isinstance(order, np.ndarray) else list(order)
    n = len(t)
    total = d[t[n - 1]][t[0]]
    for i in range(n - 1):
        total += d[t[i]][t[i + 1]]
    return total


def two_opt(dist: np.ndarray, order: np.ndarray) -> np.ndarray:
    """First-improvement 2-OPT to a local optimum.

    Scans position pairs (i, j) lexicographically, i in 0..n-3 and
    j in i+2..n-1 (skipping (0, n-1), whose tour edges are adjacent);
    an accepted move reverses the segment at positions i+1..j and
    restarts the scan. Stops when no exchange improves by more than 1e-10.
    """
    d = dist.tolist() if isinstance(dist, np.ndarray) else dist
    t = order.tolist() if isinstance(order, np.ndarray) else list(order)
    n = len(t)
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a = t[i]
            b = t[i + 1]
            d_ab = d[a][b]
            j_stop = n if i > 0 else n - 1
            row_a = d[a]
            row_b = d[b]
            for j in range(i + 2, j_stop):
                c = t[j]
                e = t[j + 1] if j + 1 < n else t[0]
                delta = row_a[c] + row_b[e] - d_ab - d[c][e]
                if delta < -_TWO_OPT_TOL:
                    t[i + 1:j + 1] = t[j:i:-1]
                    improved = True
                    break
            if improved:
                break
    return np.array(t, dtype=np.int64)


def held_karp(dist: np.ndarray) -> float:
    """Exact optimal closed-tour length by subset DP, O(n^2 2^n)."""
    d = dist.tolist() if isinstance(dist, np.ndarray) else dist
    n = len(d)
    m = n - 1  # cities 1..n-1 mapped to bits 0..m-1; tours anchored at city 0
    size = 1 << m
    dp = [_INF] * (size * m)
    row0 = d[0]
    for j in range(m):
        dp[(1 << j) * m + j] = row0[j + 1]
    for mask in range(3, size):
        if mask & (mask - 1) == 0:  # singletons already initialized
            continue
        base = mask * m
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            pmask = mask ^ (1 << j)
            pbase = pmask * m
            col = d[j + 1]
            best = _INF
            for k in range(m):
                if not (pmask >> k) & 1:
                    continue
                cand = dp[pbase + k] + col[k + 1]
                if cand < best:
                    best = cand
            dp[base + j] = best
    full = size - 1
    base = full * m
    best = _INF
    for j in range(m):
        cand = dp[base + j] + d[j + 1][0]
        if cand < best:
            best = cand
    return best
