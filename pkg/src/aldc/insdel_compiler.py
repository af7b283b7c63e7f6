"""Compile a Hamming-error code with consecutive-interval queries into an
insertion/deletion code.

Encoding splits the Hamming codeword into ``tau``-bit blocks and writes each
one, tagged with its index, as an insdel block (see :mod:`aldc.inner_codes`).
Decoding runs the Hamming decoder against a *simulated* oracle: whenever
the inner decoder reads a ``t``-bit interval, the blocks covering it are
located in the corrupted word by a noisy binary search on block indices
(``recover_blocks``) and decoded.

Implementation note on speed. A search step decodes ``N`` windows of
about ``c_w * blk_len`` bits. Every window is charged to the oracle in full, but
the work of segmenting and decoding it is shared through a per-word
``WordScan`` table: window results are a function of the bits inside the
window only, and the table reproduces exactly what a scan of that window
alone would return (``block_decode_window`` is the single-window reference;
the tests check the two agree).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .bits import int_to_bits, symbols_to_bits, bits_to_symbols
from .errors import DecodeFailure, InvalidInput, QueryRangeError
from .inner_codes import (
    InsdelBlockParams,
    block_decode_window,
    decode_intact_regions,
    decode_region,
    manchester,
    regions_between,
    rs_encode_symbols,
    scan_gaps,
    scan_regions,
)
from .oracle import BitOracle, CorruptedOracle


@dataclass(frozen=True)
class CompilerParams:
    """Knobs of the compiled code.

    ``m`` is the Hamming codeword length and ``t`` the interval length the
    inner decoder reads in; both must be multiples of ``tau``.
    """

    m: int
    tau: int = 32
    t: int = 32
    gamma: float = 0.1
    theta: float = 0.05
    pad_rate: float = 0.25
    idx_bits: int = 32
    lambda0: int = 16
    w_lo: float = 1 / 3
    buffer_thresh: float = 0.25
    c_w: int = 2
    c_N: float = 1.0
    n_min: int = 9
    h_delta: float = 1 / 16
    block: InsdelBlockParams = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "block", InsdelBlockParams(
            tau=self.tau, idx_bits=self.idx_bits, pad_rate=self.pad_rate,
            lambda0=self.lambda0, w_lo=self.w_lo, buffer_thresh=self.buffer_thresh,
            gamma=self.gamma,
        ))

    @property
    def n_blocks(self) -> int:
        return self.m // self.tau

    @property
    def t_blocks(self) -> int:
        return self.t // self.tau

    @property
    def blk_len(self) -> int:
        return self.block.block_len

    @property
    def beta(self) -> float:
        return self.block.beta

    @property
    def codeword_len(self) -> int:
        return self.n_blocks * self.blk_len

    @property
    def rho(self) -> float:
        return rho_for(self.beta, self.gamma)

    @property
    def c_stop(self) -> float:
        return 36 * (self.beta + self.gamma)

    @property
    def half_window(self) -> int:
        # c_w*blk_len plus one inter-block zero run on each side, so a
        # window centred in a buffer still sees both delimiters of the
        # neighbouring bodies
        return (self.c_w * self.blk_len) // 2 + 2 * self.block.buffer_len

    @property
    def window_len(self) -> int:
        return 2 * self.half_window + 1

    def n_samples(self, n_tilde: int) -> int:
        return max(self.n_min, math.ceil(self.c_N * math.log(max(n_tilde, 2)) ** 2))

    @property
    def delta_work(self) -> float:
        """Largest corruption fraction the analysis covers."""
        return self.h_delta * self.pad_rate * self.gamma / (8 * self.beta * (1 + 1 / self.theta))

    def query_bound(self, n_blocks: int, n_tilde: int) -> float:
        """Query allowance of one ``recover_blocks`` call over ``n_blocks`` blocks."""
        return self.query_constant() * (n_blocks * self.tau + self.tau * math.log2(max(n_tilde, 2)) ** 3)

    @functools.cache
    def query_constant(self) -> float:
        """``C`` with ``queries <= C * ((b-a+1)*tau + tau*log2(n)^3)`` for one
        ``recover_blocks`` call, valid for every word length.

        Search steps: at most ``ln(n)/-ln(1-rho') + 2``; samples per step at
        most ``c_N ln(n)^2 + n_min + 1``; window length at most
        ``window_len``. The final read costs at most
        ``c_stop*(b-a+1)*tau + 2``. The search term is bounded by
        ``K * tau * log2(n)^3`` with ``K`` the maximum of the ratio over
        ``log2 n`` from the smallest length at which a search step can
        happen.
        """
        tau = self.tau
        rho_eff = self.rho - 2 / (self.c_stop * tau)
        w = self.window_len
        l0 = max(1.0, math.log2(self.c_stop * tau))
        worst = 0.0
        for k in range(0, 4000):
            L = l0 + k * 0.05
            ln_n = L * math.log(2)
            steps = ln_n / -math.log(1 - rho_eff) + 2
            samples = self.c_N * ln_n ** 2 + self.n_min + 1
            worst = max(worst, steps * samples * w / (tau * L ** 3))
        return 1.01 * worst + self.c_stop + 2 / tau


def rho_for(beta: float, gamma: float) -> float:
    """Cut fraction of the binary search; non-positive means no progress."""
    if gamma >= beta:
        return -math.inf
    return min(0.25 * (beta - gamma) / (beta + gamma), 1 - 0.75 * (beta + gamma) / (beta - gamma))


def core_violations(beta: float, gamma: float, theta: float) -> list[str]:
    """The constraints tying (beta, gamma, theta) together."""
    out = []
    if not 0 < gamma < 1:
        out.append("gamma must lie in (0, 1)")
    if not 0 < theta < 1:
        out.append("theta must lie in (0, 1)")
    if gamma >= beta:
        out.append("gamma must be below beta")
    elif (beta + gamma) / (beta - gamma) >= 4 / 3:
        out.append(f"(beta+gamma)/(beta-gamma) = {(beta + gamma) / (beta - gamma):.4f} is not < 4/3")
    lhs = 2 * ((1 + 1 / beta) * gamma + theta)
    if lhs >= 1 / 3:
        out.append(f"2((1+1/beta)gamma+theta) = {lhs:.4f} is not < 1/3")
    rho = rho_for(beta, gamma)
    if rho <= 0:
        out.append(f"rho = {rho:.4f} is not positive")
    return out


def validate_params(p: CompilerParams, delta: float | None = None) -> list[str]:
    """Every violated constraint, as human-readable strings (empty = ok)."""
    problems = []
    b, g, th = p.beta, p.gamma, p.theta
    if p.tau <= 0 or p.m <= 0:
        problems.append("tau and m must be positive")
        return problems
    if p.m % p.tau:
        problems.append(f"tau={p.tau} does not divide m={p.m}")
    if p.t % p.tau:
        problems.append(f"tau={p.tau} does not divide t={p.t}")
    if not 0 < p.pad_rate < 1:
        problems.append("pad_rate must lie in (0, 1)")
    if p.buffer_thresh >= p.w_lo:
        problems.append("buffer_thresh must be below w_lo")
    problems += core_violations(b, g, th)
    if p.n_min < 9 or p.c_N <= 0:
        problems.append("need n_min >= 9 and c_N > 0")
    if p.c_w < 1:
        problems.append("c_w must be at least 1")
    if delta is not None and delta > p.delta_work:
        problems.append(f"delta = {delta:g} exceeds the working budget {p.delta_work:.3g}")
    return problems


# ---------------------------------------------------------------------------
# encoding

def enc_compile(y, p: CompilerParams) -> np.ndarray:
    """Write ``y`` as ``B`` insdel blocks, block ``j`` carrying ``y<j>`` and ``j``."""
    y = np.asarray(y, dtype=np.uint8)
    if y.size != p.m:
        raise InvalidInput(f"expected a {p.m}-bit Hamming codeword, got {y.size}")
    if p.m % p.tau:
        raise InvalidInput("tau must divide the codeword length")
    bp = p.block
    B = p.n_blocks
    msgs = np.zeros((B, bp.ecc.message_bits), dtype=np.uint8)
    idx = np.arange(1, B + 1, dtype=np.int64)
    msgs[:, : bp.idx_bits] = ((idx[:, None] >> np.arange(bp.idx_bits)) & 1).astype(np.uint8)
    msgs[:, bp.idx_bits : bp.idx_bits + p.tau] = y.reshape(B, p.tau)
    c = bp.ecc.c
    syms = bits_to_symbols(msgs.reshape(-1), c).reshape(B, bp.ecc.a)
    coded = symbols_to_bits(rs_encode_symbols(syms, bp.ecc).reshape(-1), c).reshape(B, bp.coded_bits)
    bodies = manchester(coded.reshape(-1)).reshape(B, bp.body_len)
    buf = np.zeros((B, bp.buffer_len), dtype=np.uint8)
    return np.concatenate([buf, bodies, buf], axis=1).reshape(-1)


# ---------------------------------------------------------------------------
# scanning a received word

class WordScan:
    """Candidate block bodies of a whole received word, decoded lazily.

    Region ``k`` lies between low-weight gaps ``k`` and ``k + 1``. A window
    sees region ``k`` exactly when both bounding gaps are visible in it,
    which reduces to two comparisons on ``gap_end_left`` and
    ``gap_start_right``.
    """

    def __init__(self, word: np.ndarray, bp: InsdelBlockParams):
        self.word = word
        self.bp = bp
        self.n = word.size
        gs, ge = scan_gaps(word, bp, True, True)
        rs, re = regions_between(gs, ge, bp, self.n)
        keep = rs <= re
        self.rs, self.re = rs[keep], re[keep]
        self.gap_end_left = ge[:-1][keep]
        self.gap_start_right = gs[1:][keep]
        self.index = np.full(self.rs.size, -2, dtype=np.int64)  # -2: not decoded yet
        self.payloads: dict[int, np.ndarray] = {}
        # searchsorted answers for every possible query value, so lookups
        # during the search are plain gathers
        lam = bp.lambda0
        span = np.arange(-lam, self.n + 2)
        self._off = lam
        self._tables: dict[int, np.ndarray] = {}
        self._first_end_ge = np.searchsorted(self.re, span, side="left")
        self._first_gap_ge = np.searchsorted(self.gap_end_left, span, side="left")
        self._gaps_le = np.searchsorted(self.gap_start_right, span, side="right")

    @classmethod
    def of(cls, oracle: CorruptedOracle, bp: InsdelBlockParams) -> "WordScan":
        key = ("wordscan", bp)
        scan = oracle.shared.get(key)
        if scan is None:
            scan = oracle.shared[key] = cls(oracle.content, bp)
        return scan

    def decoded(self, ks: np.ndarray) -> np.ndarray:
        """Block index decoded from each region in ``ks`` (-1 for failure)."""
        ks = np.asarray(ks, dtype=np.int64)
        todo = np.unique(ks[self.index[ks] == -2])
        if todo.size:
            fast, payloads = decode_intact_regions(self.word, self.rs[todo], self.re[todo], self.bp)
            self.index[todo] = fast
            for row, w in payloads.items():
                self.payloads[int(todo[row])] = w
            todo = todo[fast == -2]
        for k in todo.tolist():
            got = decode_region(self.word[self.rs[k] : self.re[k] + 1], self.bp)
            if got is None:
                self.index[k] = -1
            else:
                self.index[k] = got[0]
                self.payloads[k] = got[1]
        return self.index[ks]

    def window_results(self, half: int) -> np.ndarray:
        """Block-Decode result for a window of half-width ``half`` centred
        at every position of the word (index ``i - 1`` for position ``i``)."""
        table = self._tables.get(half)
        if table is None:
            centers = np.arange(1, self.n + 1, dtype=np.int64)
            lo = np.maximum(1, centers - half)
            hi = np.minimum(self.n, centers + half)
            ks = self.nearest(lo - 1, hi - 1, centers - 1)
            table = np.full(self.n, -1, dtype=np.int32)
            ok = ks >= 0
            if ok.any():
                table[ok] = self.decoded(ks[ok])
            self._tables[half] = table
        return table

    def visible(self, lo0: np.ndarray, hi0: np.ndarray):
        """Range ``[k_lo, k_hi]`` of regions visible in windows ``[lo0, hi0]``
        (0-based, inclusive)."""
        lam = self.bp.lambda0
        p_min = np.where(lo0 == 0, -lam, lo0)
        p_max = np.where(hi0 == self.n - 1, self.n, hi0 - lam + 1)
        k_lo = self._first_gap_ge[p_min + self._off]
        k_hi = self._gaps_le[p_max + self._off] - 1
        return k_lo, k_hi

    def nearest(self, lo0, hi0, centers):
        """Region nearest to each center among those visible in its window,
        or -1. Ties go to the earlier region."""
        k_lo, k_hi = self.visible(lo0, hi0)
        K = self.rs.size
        if K == 0:
            return np.full(len(centers), -1, dtype=np.int64)
        k1 = self._first_end_ge[centers + self._off]
        kc = np.maximum(k1, k_lo)
        kc_safe = np.minimum(kc, K - 1)
        contains = (kc <= k_hi) & (kc < K) & (self.rs[kc_safe] <= centers)
        kl = np.minimum(k1 - 1, k_hi)
        left_ok = (kl >= k_lo) & (kl >= 0)
        kr = kc
        right_ok = (kr <= k_hi) & (kr < K)
        dl = np.where(left_ok, centers - self.re[np.clip(kl, 0, K - 1)], np.iinfo(np.int64).max)
        dr = np.where(right_ok, self.rs[np.clip(kr, 0, K - 1)] - centers, np.iinfo(np.int64).max)
        pick = np.where(dl <= dr, kl, kr)
        pick = np.where(left_ok | right_ok, pick, -1)
        return np.where(contains, kc, pick)


def _windows(centers: np.ndarray, p: CompilerParams, n: int):
    h = p.half_window
    lo = np.maximum(1, centers - h)
    hi = np.minimum(n, centers + h)
    return lo, hi


def block_decode_batch(oracle: CorruptedOracle, centers, p: CompilerParams) -> np.ndarray:
    """Block-Decode at many positions at once (1-based); -1 marks failure."""
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        return centers.copy()
    if centers.min() < 1 or centers.max() > oracle.length:
        raise QueryRangeError("block decode position outside the word")
    lo, hi = _windows(centers, p, oracle.length)
    oracle.charge(lo, hi)
    return WordScan.of(oracle, p.block).window_results(p.half_window)[centers - 1]


def block_decode_at(oracle: BitOracle, i: int, p: CompilerParams) -> int | None:
    """Decode the block nearest position ``i`` from a window around it.

    This is the plain single-window version: it reads the window and scans
    it on its own.
    """
    n = oracle.length
    if not 1 <= i <= n:
        raise QueryRangeError(f"position {i} outside [1, {n}]")
    h = p.half_window
    lo, hi = max(1, i - h), min(n, i + h)
    window = oracle.read_range(lo, hi)
    return block_decode_window(window, i - lo, p.block, lo == 1, hi == n)


def sim_recover_block(window, l: int, r: int, q: int, p: CompilerParams, n_tilde: int):
    """Payload of block ``q`` from the already-read window ``Y[l..r]``.

    Scans the window for delimited bodies in order and returns the first
    whose decoded index is ``q``; ``None`` if there is none. No queries.
    """
    window = np.asarray(window, dtype=np.uint8)
    for s, e in scan_regions(window, p.block, l == 1, r == n_tilde):
        got = decode_region(window[s : e + 1], p.block)
        if got is not None and got[0] == q:
            return got[1]
    return None


# ---------------------------------------------------------------------------
# noisy binary search

@dataclass
class RecoveredBlocks:
    a: int
    b: int
    payloads: list  # np.ndarray or None per block a..b
    queries: int
    iterations: int
    window: tuple[int, int]
    duplicates: int = 0


def _lower_median(js: np.ndarray):
    """Row-wise lower median of the non-negative entries; -1 if none."""
    N = js.shape[1]
    if N and js.min() >= 0:
        mid = (N - 1) // 2
        return np.partition(js, mid, axis=1)[:, mid]
    big = np.iinfo(js.dtype).max
    masked = np.where(js >= 0, js, big)
    masked.sort(axis=1)
    cnt = (js >= 0).sum(axis=1)
    pos = np.maximum(cnt - 1, 0) // 2
    med = masked[np.arange(js.shape[0]), pos]
    return np.where(cnt > 0, med, -1)


def recover_blocks_batch(oracle: CorruptedOracle, intervals, p: CompilerParams,
                         rng: np.random.Generator, l0: int = 1, r0: int | None = None,
                         history: list | None = None):
    """Run RecoverBlocks for several block intervals side by side.

    Each search keeps its own ``[l, r]``; samples for all active searches
    are drawn in one array per step. Returns one :class:`RecoveredBlocks`
    per interval, in order. If ``history`` is a list, a copy of ``(l, r)``
    is appended to it before every step and once after the last.
    """
    n = oracle.length
    r0 = n + 1 if r0 is None else r0
    if not 1 <= l0 < r0 <= n + 1:
        raise InvalidInput(f"search interval [{l0}, {r0}) outside [1, {n + 1}]")
    K = len(intervals)
    if K == 0:
        return []
    a = np.array([iv[0] for iv in intervals], dtype=np.int64)
    b = np.array([iv[1] for iv in intervals], dtype=np.int64)
    if np.any(a < 1) or np.any(b < a):
        raise InvalidInput("bad block interval")
    l = np.full(K, l0, dtype=np.int64)
    r = np.full(K, r0, dtype=np.int64)
    stop = p.c_stop * (b - a + 1) * p.tau
    rho = p.rho
    N = p.n_samples(n)
    queries = np.zeros(K, dtype=np.int64)
    iters = np.zeros(K, dtype=np.int64)
    scan = WordScan.of(oracle, p.block)
    h = p.half_window
    table = scan.window_results(h)
    for _ in range(10_000):
        if history is not None:
            history.append((l.copy(), r.copy()))
        active = np.flatnonzero(r - l > stop)
        if active.size == 0:
            break
        la, ra = l[active], r[active]
        m1 = np.floor((1 - rho) * la + rho * ra).astype(np.int64)
        m2 = np.ceil(rho * la + (1 - rho) * ra).astype(np.int64)
        np.maximum(m2, m1, out=m2)
        # float32 draws and int32 positions keep the per-sample arrays small;
        # 24 bits of resolution is plenty for a position in a sub-interval
        u = rng.random((active.size, N), dtype=np.float32)
        centers = (u * (m2 - m1 + 1).astype(np.float32)[:, None]).astype(np.int32)
        centers += m1.astype(np.int32)[:, None]
        # m1 >= l >= 1 already; float rounding can reach m2 + 1 at the top
        np.minimum(centers, np.minimum(m2, n).astype(np.int32)[:, None], out=centers)
        # windows of rows far from both ends are never clipped
        per_row = np.full(active.size, N * (2 * h + 1), dtype=np.int64)
        edge = np.flatnonzero((m1 - h < 1) | (m2 + h > n))
        if edge.size:
            ce = centers[edge].astype(np.int64)
            per_row[edge] = (np.minimum(ce + h, n) - np.maximum(ce - h, 1) + 1).sum(axis=1)
        oracle.charge_windows(centers, h, per_row.sum())
        queries[active] += per_row
        js = table[centers - 1]
        med = _lower_median(js)
        cut_left = (med >= 0) & (a[active] > med)
        l[active] = np.where(cut_left, m1, la)
        r[active] = np.where(cut_left, ra, m2)
        iters[active] += 1

    lo_f = np.maximum(1, l)
    hi_f = np.minimum(n, r)
    oracle.charge(lo_f, hi_f)
    queries += hi_f - lo_f + 1
    k_lo, k_hi = scan.visible(lo_f - 1, hi_f - 1)
    span = np.maximum(k_hi - k_lo + 1, 0)
    total = int(span.sum())
    width = b - a + 1
    base = np.concatenate([[0], np.cumsum(width)])
    first = np.full(int(base[-1]), -1, dtype=np.int64)  # region giving each (interval, q)
    dups = np.zeros(K, dtype=np.int64)
    if total:
        owner = np.repeat(np.arange(K), span)
        ks = np.repeat(k_lo - np.concatenate([[0], np.cumsum(span)[:-1]]), span) + np.arange(total)
        js = scan.decoded(ks)
        hit = (js >= a[owner]) & (js <= b[owner])
        slot = base[owner[hit]] + js[hit] - a[owner[hit]]
        # flat order is by interval, then scan order, so the first
        # occurrence of a slot is the first region claiming that block
        uniq, idx, cnt = np.unique(slot, return_index=True, return_counts=True)
        first[uniq] = ks[hit][idx]
        np.add.at(dups, owner[hit][idx], cnt - 1)
    results = []
    for c in range(K):
        payloads = [None if kk < 0 else scan.payloads[int(kk)] for kk in first[base[c] : base[c + 1]].tolist()]
        results.append(RecoveredBlocks(int(a[c]), int(b[c]), payloads, int(queries[c]),
                                       int(iters[c]), (int(lo_f[c]), int(hi_f[c])), int(dups[c])))
    return results


def recover_blocks(oracle: CorruptedOracle, l: int, r: int, a: int, b: int,
                   p: CompilerParams, rng: np.random.Generator,
                   history: list | None = None) -> RecoveredBlocks:
    """Locate and decode blocks ``a..b`` by noisy binary search in ``[l, r]``."""
    return recover_blocks_batch(oracle, [(a, b)], p, rng, l0=l, r0=r, history=history)[0]


# ---------------------------------------------------------------------------
# the compiled decoder

class SimulatedOracle(BitOracle):
    """The Hamming codeword as seen through the insdel word.

    Reads must be intervals of at most ``t`` bits inside ``[(j-1)t+1, (j+1)t]``
    with ``j = ceil(u/t)``. Each such read triggers ``recover_blocks`` on
    the two block intervals ``[(j-1)t'+1, jt']`` and ``[jt'+1, (j+1)t']``
    (cached for the lifetime of this object). Bits of blocks that could
    not be recovered come back as zeros and are reported by ``erased``.
    """

    def __init__(self, word_oracle: CorruptedOracle, p: CompilerParams, rng: np.random.Generator):
        super().__init__(p.m)
        self.word = word_oracle
        self.p = p
        self.rng = rng
        self.blocks: dict[int, np.ndarray | None] = {}
        self.calls: list[RecoveredBlocks] = []

    def _intervals_for(self, u: int, v: int):
        t, tb, B = self.p.t, self.p.t_blocks, self.p.n_blocks
        if v - u + 1 > t:
            raise QueryRangeError(f"read [{u}, {v}] is longer than t={t}")
        j = -(-u // t)
        if v > (j + 1) * t:
            raise QueryRangeError(f"read [{u}, {v}] is not inside two consecutive t-intervals")
        out = [((j - 1) * tb + 1, min(j * tb, B))]
        if j * tb + 1 <= B:
            out.append((j * tb + 1, min((j + 1) * tb, B)))
        return out

    def _fetch_many(self, ranges):
        wanted = []
        for u, v in ranges:
            for iv in self._intervals_for(u, v):
                if iv[0] not in self.blocks and iv not in wanted:
                    wanted.append(iv)
        for res in recover_blocks_batch(self.word, wanted, self.p, self.rng):
            self.calls.append(res)
            for q, payload in zip(range(res.a, res.b + 1), res.payloads):
                self.blocks[q] = payload
        return [self._assemble(u, v)[0] for u, v in ranges]

    def _assemble(self, u: int, v: int):
        tau = self.p.tau
        q0, q1 = (u - 1) // tau + 1, (v - 1) // tau + 1
        bits, gone = [], []
        for q in range(q0, q1 + 1):
            payload = self.blocks.get(q)
            if payload is None:
                bits.append(np.zeros(tau, dtype=np.uint8))
                gone.append(np.ones(tau, dtype=bool))
            else:
                bits.append(payload)
                gone.append(np.zeros(tau, dtype=bool))
        off = (q0 - 1) * tau
        sl = slice(u - 1 - off, v - off)
        return np.concatenate(bits)[sl], np.concatenate(gone)[sl]

    def erased(self, l: int, r: int):
        q0, q1 = (l - 1) // self.p.tau + 1, (r - 1) // self.p.tau + 1
        if all(self.blocks.get(q) is not None for q in range(q0, q1 + 1)):
            return None
        return self._assemble(l, r)[1]


def compiled_dec(oracle: CorruptedOracle, inner_dec, p: CompilerParams,
                 rng: np.random.Generator, trace: dict | None = None):
    """Run ``inner_dec`` (a callable taking an oracle) on the simulated
    Hamming word and return its answer.

    ``inner_dec`` should raise :class:`DecodeFailure` when it cannot answer.
    If ``trace`` is given it receives the list of ``recover_blocks`` calls.
    """
    sim = SimulatedOracle(oracle, p, rng)
    try:
        return inner_dec(sim)
    finally:
        if trace is not None:
            trace["calls"] = sim.calls
            trace["sim_log"] = sim.log
