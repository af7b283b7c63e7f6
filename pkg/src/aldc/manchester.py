"""Manchester line code and its demodulation under insertions/deletions.

A Manchester stream is easy to produce and hard to read back once bits
have been inserted or deleted: long stretches can be explained equally
well by several alignments. Demodulation therefore works one outer-code
symbol at a time. For a chunk of received bits meant to hold one symbol
(``2 * symbol_bits`` bits when clean) we compute the indel cost of the
cheapest explanation; a search over chunk boundaries then lists whole-word
readings in order of total cost. A chunk read at cost 0 yields a symbol
value, any other chunk yields an erasure, so each reading is ready for an
errors-and-erasures decoder.
"""

from __future__ import annotations

import heapq

import numpy as np

_INF = 1 << 20


def manchester(bits) -> np.ndarray:
    """Encode bit ``b`` as the pair ``b, 1-b``."""
    bits = np.asarray(bits, dtype=np.uint8)
    return np.stack([bits, 1 - bits], axis=1).reshape(-1)


def manchester_clean(stream) -> np.ndarray | None:
    """Decode a stream of valid pairs, or return ``None``."""
    stream = np.asarray(stream, dtype=np.uint8)
    if stream.size % 2:
        return None
    pairs = stream.reshape(-1, 2)
    if np.any(pairs[:, 0] == pairs[:, 1]):
        return None
    return pairs[:, 0].copy()


def chunk_costs(chunks: np.ndarray, lengths: np.ndarray, npairs: int, cap: int) -> np.ndarray:
    """Indel cost from each chunk to its nearest Manchester word.

    ``chunks`` is a ``(K, Lmax)`` array padded with the sentinel 2 beyond
    ``lengths``. Costs above ``cap`` are reported as ``cap + 1``. Per coded
    bit the moves are: a clean pair (0), an invalid pair (2), one surviving
    bit (1), nothing (2), a pair with one stray bit inside or after it (1);
    received bits may also be skipped at cost 1 each.
    """
    K, lmax = chunks.shape
    pad = np.full((K, 3), 2, dtype=np.int64)
    r = np.concatenate([chunks.astype(np.int64), pad], axis=1)
    x, y, z = r[:, : lmax + 1], r[:, 1 : lmax + 2], r[:, 2 : lmax + 3]
    pair_ok = (x != y) & (y < 2)
    cost2 = np.where(pair_ok, 0, np.where(y < 2, 2, _INF))
    one = np.where(x < 2, 1, _INF)
    cost3 = np.where(
        (z < 2) & ((y != z) | (x != z) | (x != y)), 1, _INF
    )
    width = lmax + 4
    idx = np.arange(width)
    valid = idx[None, :] <= lengths[:, None]

    def close(f):
        f = np.where(valid, f, _INF)
        return np.minimum(np.minimum.accumulate(f - idx, axis=1) + idx, _INF)

    f = np.full((K, width), _INF, dtype=np.int64)
    f[:, 0] = 0
    f = close(f)
    for _ in range(npairs):
        base = f[:, : lmax + 1]
        g = np.full((K, width), _INF, dtype=np.int64)
        g[:, : lmax + 1] = base + 2
        g[:, 1 : lmax + 2] = np.minimum(g[:, 1 : lmax + 2], base + one)
        g[:, 2 : lmax + 3] = np.minimum(g[:, 2 : lmax + 3], base + cost2)
        g[:, 3 : lmax + 4] = np.minimum(g[:, 3 : lmax + 4], base + cost3)
        f = close(g)
    out = f[np.arange(K), lengths]
    return np.minimum(out, cap + 1)


def sync_readings(s, nsym: int, symbol_bits: int, max_cost: int, max_readings: int = 64):
    """Readings of a stripped Manchester body, cheapest first.

    ``s`` is the received body with surrounding zeros removed. One zero is
    restored on each side at no cost, because stripping may have eaten the
    leading half of a ``01`` pair or the trailing half of a ``10`` pair.

    Yields ``(cost, symbols, erased)`` with ``symbols`` holding integer
    symbol values (LSB-first) and ``erased`` a boolean mask.
    """
    s = np.asarray(s, dtype=np.uint8)
    r = np.concatenate([[0], s, [0]]).astype(np.uint8)
    n = r.size
    w = 2 * symbol_bits
    D = max_cost
    lo = [max(0, w * q - D) for q in range(nsym + 1)]
    hi = [min(n, w * q + 1 + D) for q in range(nsym + 1)]
    if lo[nsym] > hi[nsym]:
        return

    keys, rows, lens = [], [], []
    lmax = w + D
    for q in range(nsym):
        for b in range(lo[q], hi[q] + 1):
            for length in range(max(0, w - D), w + D + 1):
                b2 = b + length
                if lo[q + 1] <= b2 <= hi[q + 1]:
                    row = np.full(lmax, 2, dtype=np.uint8)
                    row[:length] = r[b:b2]
                    keys.append((q, b, b2))
                    rows.append(row)
                    lens.append(length)
    if not keys:
        return
    costs = chunk_costs(np.array(rows), np.array(lens), symbol_bits, D)
    weights = 1 << np.arange(symbol_bits)
    edges: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    for (q, b, b2), c, row, length in zip(keys, costs.tolist(), rows, lens):
        if c > D:
            continue
        val = -1
        if c == 0:
            val = int(row[:length:2].astype(np.int64) @ weights)
        edges.setdefault((q, b), []).append((b2, c, val))

    def lead(b):
        return max(0, b - 1)

    def trail(b):
        return max(0, n - b - 1)

    # cheapest completion from each boundary
    rest = {(nsym, b): trail(b) for b in range(lo[nsym], hi[nsym] + 1)}
    for q in range(nsym - 1, -1, -1):
        for b in range(lo[q], hi[q] + 1):
            best = _INF
            for b2, c, _ in edges.get((q, b), ()):
                best = min(best, c + rest.get((q + 1, b2), _INF))
            rest[(q, b)] = best

    heap = []
    for b in range(lo[0], hi[0] + 1):
        tot = lead(b) + rest[(0, b)]
        if tot <= D:
            heapq.heappush(heap, (tot, lead(b), 0, b, ()))
    emitted = 0
    seen = set()
    pops = 0
    while heap and emitted < max_readings and pops < 50 * max_readings:
        tot, spent, q, b, path = heapq.heappop(heap)
        pops += 1
        if q == nsym:
            vals = np.array(path, dtype=np.int64)
            key = vals.tobytes()
            if key in seen:
                continue
            seen.add(key)
            emitted += 1
            erased = vals < 0
            yield tot, np.where(erased, 0, vals), erased
            continue
        for b2, c, val in edges.get((q, b), ()):
            nspent = spent + c
            if q + 1 == nsym:
                ntot = nspent + trail(b2)
            else:
                ntot = nspent + rest.get((q + 1, b2), _INF)
            if ntot <= D:
                heapq.heappush(heap, (ntot, nspent, q + 1, b2, path + (val,)))
