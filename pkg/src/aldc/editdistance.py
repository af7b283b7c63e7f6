"""Insertion/deletion distance between bit strings.

Two implementations with different jobs:

* ``indel_distance`` is exact for any pair. It computes the LCS with the
  bit-parallel recurrence over Python integers, so long strings are cheap.
* ``banded_indel_distance`` only looks at a diagonal band and reports
  ``band + 1`` once the distance is known to exceed the band. The block
  decoder uses it as an accept/reject test.
"""

from __future__ import annotations

import numpy as np


def _lcs_bitparallel(a: np.ndarray, b: np.ndarray) -> int:
    # Hyyro-style bit-vector LCS; a is the "pattern" packed into an int.
    if a.size == 0 or b.size == 0:
        return 0
    n = a.size
    full = (1 << n) - 1
    weights = 1 << np.arange(n, dtype=object)
    match = {
        0: int(np.sum(weights[a == 0])) if np.any(a == 0) else 0,
        1: int(np.sum(weights[a == 1])) if np.any(a == 1) else 0,
    }
    v = full
    for ch in b.tolist():
        u = v & match[ch]
        v = ((v + u) | (v - u)) & full
    return n - bin(v).count("1")


def indel_distance(a, b) -> int:
    """Exact edit distance when only insertions and deletions are allowed."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    return int(a.size + b.size - 2 * _lcs_bitparallel(a, b))


def indel_distance_dp(a, b) -> int:
    """Textbook quadratic DP; slow, used to cross-check the fast version."""
    a = list(np.asarray(a).tolist())
    b = list(np.asarray(b).tolist())
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1]
            else:
                cur[j] = 1 + min(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def banded_indel_distance(a, b, band: int, free_end_zeros: bool = False) -> int:
    """Indel distance restricted to ``|i - j| <= band``.

    Returns the exact distance whenever it is at most ``band``; otherwise
    returns ``band + 1``. With ``free_end_zeros``, zeros of ``b`` that lie
    before the first or after the last aligned position cost nothing to
    delete (useful when ``b`` was cut out of a zero-padded stream).
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    n, m = a.size, b.size
    cap = band + 1
    if abs(n - m) > band and not free_end_zeros:
        return cap
    if n == m and np.array_equal(a, b):
        return 0
    inf = cap
    width = 2 * band + 1
    # row[k] holds D[i][i - band + k]
    prev = np.full(width, inf, dtype=np.int64)
    lead = np.concatenate([[0], np.cumsum(b)]) if free_end_zeros else np.arange(m + 1)
    for k in range(width):
        j = k - band
        if 0 <= j <= m:
            prev[k] = min(int(lead[j]), inf)
    al = a.tolist()
    bl = b.tolist()
    for i in range(1, n + 1):
        cur = [inf] * width
        x = al[i - 1]
        lo = max(0, i - band)
        hi = min(m, i + band)
        for j in range(lo, hi + 1):
            k = j - i + band
            if j == 0:
                best = i
            else:
                best = inf
                if bl[j - 1] == x:
                    best = prev[k]  # D[i-1][j-1] sits at the same offset
                if k + 1 < width:
                    best = min(best, prev[k + 1] + 1)  # D[i-1][j]
                if k - 1 >= 0:
                    best = min(best, cur[k - 1] + 1)  # D[i][j-1]
            cur[k] = min(best, inf)
        prev = np.asarray(cur, dtype=np.int64)
        if prev.min() >= inf:
            return cap
    if free_end_zeros:
        tail = np.concatenate([np.cumsum(b[::-1])[::-1], [0]])  # ones in b[j:]
        best = inf
        for k in range(width):
            j = n - band + k
            if 0 <= j <= m:
                best = min(best, int(prev[k]) + int(tail[j]))
        return int(min(best, cap))
    k = m - n + band
    return int(min(prev[k], cap))
