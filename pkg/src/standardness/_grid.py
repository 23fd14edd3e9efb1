"""Compiled kernels for exact fixed-radius neighbour counting.

The grid uses cells of side ``r`` anchored at the minimum corner of the
cloud, so every pair within distance ``r`` lies in the same or adjacent
cells. Non-empty cells are kept as a lexicographically sorted array of
integer coordinates and located by binary search, which keeps memory
proportional to ``n`` whatever the ratio of extent to radius.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lex_cmp(a, b):
    for k in range(a.shape[0]):
        if a[k] < b[k]:
            return -1
        if a[k] > b[k]:
            return 1
    return 0


@njit(cache=True, nogil=True)
def _find_cell(cells, key):
    lo = 0
    hi = cells.shape[0] - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        c = _lex_cmp(cells[mid], key)
        if c == 0:
            return mid
        if c < 0:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


@njit(cache=True, nogil=True)
def grid_counts(points, order, cells, starts, r2):
    """Count neighbours cell by cell.

    ``order`` lists point indices sorted by cell; the points of cell ``c``
    are ``order[starts[c]:starts[c + 1]]``. Each unordered pair of cells is
    visited once and each close pair credits both ends.
    """
    n, d = points.shape
    m = cells.shape[0]
    sp = np.empty((n, d))
    for a in range(n):
        for k in range(d):
            sp[a, k] = points[order[a], k]
    acc = np.zeros(n, dtype=np.int64)
    n_off = 3 ** d
    key = np.empty(d, dtype=np.int64)
    for c in range(m):
        s0 = starts[c]
        s1 = starts[c + 1]
        # same cell: self plus each pair once
        for a in range(s0, s1):
            acc[a] += 1
            for b in range(a + 1, s1):
                s = 0.0
                for k in range(d):
                    diff = sp[a, k] - sp[b, k]
                    s += diff * diff
                if s <= r2:
                    acc[a] += 1
                    acc[b] += 1
        for o in range(n_off):
            t = o
            for k in range(d):
                key[k] = cells[c, k] + (t % 3) - 1
                t //= 3
            # visit only lexicographically larger neighbours
            if _lex_cmp(key, cells[c]) <= 0:
                continue
            nb = _find_cell(cells, key)
            if nb < 0:
                continue
            for a in range(s0, s1):
                cnt = 0
                for b in range(starts[nb], starts[nb + 1]):
                    s = 0.0
                    for k in range(d):
                        diff = sp[a, k] - sp[b, k]
                        s += diff * diff
                    hit = 1 if s <= r2 else 0
                    cnt += hit
                    acc[b] += hit
                acc[a] += cnt
    counts = np.empty(n, dtype=np.int64)
    for a in range(n):
        counts[order[a]] = acc[a]
    return counts


@njit(cache=True, nogil=True)
def naive_counts(points, r2):
    n, d = points.shape
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        cnt = 0
        for j in range(n):
            s = 0.0
            for k in range(d):
                diff = points[i, k] - points[j, k]
                s += diff * diff
            if s <= r2:
                cnt += 1
        counts[i] = cnt
    return counts
