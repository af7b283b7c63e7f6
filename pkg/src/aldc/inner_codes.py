"""Short block codes used as building blocks.

* A Reed-Solomon codec (errors and erasures) backed by ``reedsolo``.
* The insertion/deletion-tolerant block code used by the compiler: each
  block is ``0^buf . Manchester(RS(index . payload)) . 0^buf``. The zero
  buffers let a reader find block boundaries by looking for low-weight
  stretches; Manchester coding keeps every stretch of a body balanced.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import reedsolo

from .bits import bits_to_int, bits_to_symbols, int_to_bits, symbols_to_bits
from .editdistance import banded_indel_distance
from .errors import DecodeFailure, InvalidInput
from .manchester import manchester, manchester_clean, sync_readings

# Primitive polynomials for the small binary extension fields we allow.
PRIMITIVE_POLYS = {3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x89, 8: 0x11D}

# reedsolo keeps its field tables in module globals and swaps them in on
# every call, so two codecs with different fields must not interleave.
_RS_LOCK = threading.Lock()


@dataclass(frozen=True)
class EccParams:
    """RS code over GF(2^c) with ``a`` message and ``A`` codeword symbols."""

    a: int = 16
    A: int = 32
    c: int = 8

    def __post_init__(self):
        if self.c not in PRIMITIVE_POLYS:
            raise InvalidInput(f"unsupported symbol size c={self.c}")
        if not (0 < self.a < self.A <= (1 << self.c) - 1):
            raise InvalidInput("need 0 < a < A <= 2^c - 1")

    @property
    def radius(self) -> int:
        return (self.A - self.a) // 2

    @property
    def message_bits(self) -> int:
        return self.a * self.c

    @property
    def codeword_bits(self) -> int:
        return self.A * self.c

    @property
    def rate(self) -> float:
        return self.a / self.A


@lru_cache(maxsize=None)
def _codec(p: EccParams) -> reedsolo.RSCodec:
    return reedsolo.RSCodec(nsym=p.A - p.a, nsize=p.A, c_exp=p.c, prim=PRIMITIVE_POLYS[p.c])


@lru_cache(maxsize=None)
def _gf_mul_table(c: int) -> np.ndarray:
    q = 1 << c
    a = np.arange(q, dtype=np.int64)[:, None]
    b = np.arange(q, dtype=np.int64)[None, :]
    prod = np.zeros((q, q), dtype=np.int64)
    for i in range(c):  # carry-less product
        prod ^= np.where((b >> i) & 1, a << i, 0)
    for i in range(2 * c - 2, c - 1, -1):  # reduce by the field polynomial
        prod ^= np.where((prod >> i) & 1, PRIMITIVE_POLYS[c] << (i - c), 0)
    return prod


@lru_cache(maxsize=None)
def _parity_rows(p: EccParams) -> np.ndarray:
    """Parity of each unit message; the code is linear over GF(2^c)."""
    rows = np.zeros((p.a, p.A - p.a), dtype=np.int64)
    with _RS_LOCK:
        codec = _codec(p)
        for i in range(p.a):
            unit = [0] * p.a
            unit[i] = 1
            rows[i] = list(codec.encode(unit))[p.a :]
    return rows


def rs_encode_symbols(msg, p: EccParams) -> np.ndarray:
    """Systematic encoding; accepts one message or a stack of them."""
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape[-1:] != (p.a,):
        raise InvalidInput(f"expected {p.a} message symbols, got {msg.shape[-1:] or 0}")
    if msg.min(initial=0) < 0 or msg.max(initial=0) >= 1 << p.c:
        raise InvalidInput("symbol out of range")
    terms = _gf_mul_table(p.c)[msg[..., :, None], _parity_rows(p)]
    return np.concatenate([msg, np.bitwise_xor.reduce(terms, axis=-2)], axis=-1)


def rs_decode_symbols(word, p: EccParams, erasures=()) -> np.ndarray:
    """Bounded-distance errors-and-erasures decoding.

    Succeeds only when a codeword lies within ``2*errors + erasures <= A - a``
    of the received word; anything else raises :class:`DecodeFailure`,
    including the cases where the underlying decoder would silently
    return a far-away codeword.
    """
    return _rs_decode(word, p, erasures)[0]


def _rs_decode(word, p: EccParams, erasures=()):
    """``(message, codeword)`` for :func:`rs_decode_symbols`."""
    word = np.asarray(word, dtype=np.int64)
    if word.size != p.A:
        raise InvalidInput(f"expected {p.A} symbols, got {word.size}")
    erasures = sorted({int(e) for e in erasures})
    if len(erasures) > p.A - p.a:
        raise DecodeFailure("more erasures than parity symbols")
    if not erasures:
        # Systematic code: a clean word re-encodes to itself.
        if np.array_equal(rs_encode_symbols(word[: p.a], p), word):
            return word[: p.a].copy(), word
    received = word.copy()
    received[erasures] = 0
    try:
        with _RS_LOCK:
            msg, _, _ = _codec(p).decode(received.tolist(), erase_pos=erasures or None)
    except reedsolo.ReedSolomonError as exc:
        raise DecodeFailure(str(exc)) from None
    msg = np.asarray(list(msg), dtype=np.int64)
    cw = rs_encode_symbols(msg, p)
    keep = np.ones(p.A, dtype=bool)
    keep[erasures] = False
    errors = int(np.count_nonzero(cw[keep] != word[keep]))
    if 2 * errors + len(erasures) > p.A - p.a:
        raise DecodeFailure("decoder output lies outside the correction radius")
    return msg, cw


def ecc_encode(bits, p: EccParams) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != p.message_bits:
        raise InvalidInput(f"expected {p.message_bits} message bits, got {bits.size}")
    return symbols_to_bits(rs_encode_symbols(bits_to_symbols(bits, p.c), p), p.c)


def ecc_decode(bits, p: EccParams, erased_bits=None) -> np.ndarray:
    """Decode one codeword given as bits.

    ``erased_bits`` is an optional boolean mask; a symbol containing any
    erased bit is passed to the decoder as an erasure.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != p.codeword_bits:
        raise InvalidInput(f"expected {p.codeword_bits} codeword bits, got {bits.size}")
    erasures = ()
    if erased_bits is not None:
        mask = np.asarray(erased_bits, dtype=bool).reshape(p.A, p.c).any(axis=1)
        erasures = np.flatnonzero(mask).tolist()
    msg = rs_decode_symbols(bits_to_symbols(bits, p.c), p, erasures)
    return symbols_to_bits(msg, p.c)


# ---------------------------------------------------------------------------
# Insdel block code

@dataclass(frozen=True)
class InsdelBlockParams:
    tau: int = 32
    idx_bits: int = 32
    pad_rate: float = 0.25
    lambda0: int = 16
    w_lo: float = 1 / 3
    buffer_thresh: float = 0.25
    gamma: float = 0.1
    ecc_expansion: int = 2
    msg_symbols: int = field(init=False)
    ecc: EccParams = field(init=False)

    def __post_init__(self):
        if self.tau <= 0 or self.idx_bits <= 0:
            raise InvalidInput("tau and idx_bits must be positive")
        if not 0 < self.pad_rate < 1:
            raise InvalidInput("pad_rate must lie in (0, 1)")
        a_in = math.ceil((self.tau + self.idx_bits) / 8)
        object.__setattr__(self, "msg_symbols", a_in)
        object.__setattr__(self, "ecc", EccParams(a=a_in, A=self.ecc_expansion * a_in, c=8))

    @property
    def coded_bits(self) -> int:
        return self.ecc.codeword_bits

    @property
    def body_len(self) -> int:
        return 2 * self.coded_bits

    @property
    def buffer_len(self) -> int:
        return math.ceil(self.pad_rate * self.tau)

    @property
    def block_len(self) -> int:
        return self.body_len + 2 * self.buffer_len

    @property
    def beta(self) -> float:
        return self.block_len / self.tau

    @property
    def tolerance(self) -> int:
        return int(math.floor(self.gamma * self.tau))


def _block_message(j: int, w: np.ndarray, p: InsdelBlockParams) -> np.ndarray:
    msg = np.zeros(p.ecc.message_bits, dtype=np.uint8)
    msg[: p.idx_bits] = int_to_bits(j, p.idx_bits)
    msg[p.idx_bits : p.idx_bits + p.tau] = w
    return msg


def insdel_body(j: int, w, p: InsdelBlockParams) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    if w.size != p.tau:
        raise InvalidInput(f"block payload must be {p.tau} bits")
    if not 1 <= j < (1 << p.idx_bits):
        raise InvalidInput(f"block index {j} out of range")
    return manchester(ecc_encode(_block_message(j, w, p), p.ecc))


def insdel_block_encode(j: int, w, p: InsdelBlockParams) -> np.ndarray:
    buf = np.zeros(p.buffer_len, dtype=np.uint8)
    return np.concatenate([buf, insdel_body(j, w, p), buf])


def window_weight_check(body, lambda0: int, w_lo: float) -> bool:
    """True when every length-``lambda0`` window of ``body`` has weight at
    least ``w_lo * lambda0``."""
    body = np.asarray(body, dtype=np.int64)
    if lambda0 <= 0 or body.size < lambda0:
        raise InvalidInput(f"window length {lambda0} does not fit a body of {body.size} bits")
    cs = np.concatenate([[0], np.cumsum(body)])
    sums = cs[lambda0:] - cs[:-lambda0]
    return bool(sums.min() >= w_lo * lambda0)


def _strip_zeros(bits: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(bits)
    if nz.size == 0:
        return bits[:0]
    return bits[nz[0] : nz[-1] + 1]


def _trim_stray(s: np.ndarray, lam: int) -> np.ndarray:
    """Drop stray bits left in the buffer next to a body.

    A Manchester body never holds three zeros in a row, so a ``000`` run
    close to either end means the bits beyond it belong to the buffer.
    """
    s = _strip_zeros(s)
    for _ in range(2):
        head = s[: lam + 2]
        runs = np.flatnonzero((head[:-2] == 0) & (head[1:-1] == 0) & (head[2:] == 0)) if head.size >= 3 else []
        if len(runs):
            s = _strip_zeros(s[int(runs[-1]) + 3 :])
        s = s[::-1]
    return s


def _parse_message(msg: np.ndarray, p: InsdelBlockParams):
    if msg[p.idx_bits + p.tau :].any():
        return None
    j = bits_to_int(msg[: p.idx_bits])
    if j == 0:
        return None
    return j, msg[p.idx_bits : p.idx_bits + p.tau].copy()


def _verified(ref: np.ndarray, s: np.ndarray, p: InsdelBlockParams) -> bool:
    """``ref`` is the stripped clean body of the decoded message."""
    if ref.size == s.size and np.array_equal(ref, s):
        return True
    tol = p.tolerance
    return banded_indel_distance(ref, s, 2 * tol, free_end_zeros=True) <= tol


def _clean_readings(s: np.ndarray, p: InsdelBlockParams):
    """Readings of an uncorrupted body (at most two: was its leading 0 stripped?)."""
    ecc = p.ecc
    width = 2 * ecc.codeword_bits
    for lead in (1, 0):
        r = np.concatenate([[0], s, [0]])[lead:]
        if r.size - width in (0, 1) or (r.size - width == 2 and lead == 0):
            coded = manchester_clean(r[:width])
            if coded is not None:
                yield bits_to_symbols(coded, ecc.c)


def _readings(s: np.ndarray, p: InsdelBlockParams):
    """Symbol readings of a stripped body: the clean ones first, if any."""
    for syms in _clean_readings(s, p):
        yield syms, np.zeros(p.ecc.A, dtype=bool)
    for _, syms, erased in sync_readings(s, p.ecc.A, p.ecc.c, p.tolerance):
        yield syms, erased


def _accept(msg, cw, variants, p: InsdelBlockParams):
    got = _parse_message(symbols_to_bits(msg, p.ecc.c), p)
    if got is None:
        return None
    # the message parses, so cw is exactly its encoding
    ref = _strip_zeros(manchester(symbols_to_bits(cw, p.ecc.c)))
    return got if any(_verified(ref, u, p) for u in variants) else None


def _decode_stripped(s: np.ndarray, p: InsdelBlockParams):
    ecc = p.ecc
    tol = p.tolerance
    variants = [s]
    trimmed = _trim_stray(s, p.lambda0)
    if trimmed.size != s.size:
        variants.append(trimmed)
    sized = [v for v in variants if p.body_len - 2 - tol <= v.size <= p.body_len + tol]
    # Cheap pass: an intact body reads as an exact codeword.
    for v in sized:
        for syms in _clean_readings(v, p):
            if np.array_equal(rs_encode_symbols(syms[: ecc.a], ecc), syms):
                got = _accept(syms[: ecc.a], syms, variants, p)
                if got is not None:
                    return got
    tried = set()
    for v in sized:
        for syms, erased in _readings(v, p):
            key = (syms.tobytes(), erased.tobytes())
            if key in tried or erased.sum() > ecc.A - ecc.a:
                continue
            tried.add(key)
            try:
                msg, cw = _rs_decode(syms, ecc, np.flatnonzero(erased).tolist())
            except DecodeFailure:
                continue
            got = _accept(msg, cw, variants, p)
            if got is not None:
                return got
    return None


@lru_cache(maxsize=1 << 16)
def _decode_region_cached(packed: bytes, nbits: int, p: InsdelBlockParams):
    bits = np.unpackbits(np.frombuffer(packed, dtype=np.uint8), bitorder="little")[:nbits]
    return _decode_stripped(bits, p)


def decode_intact_regions(word: np.ndarray, rs: np.ndarray, re: np.ndarray, p: InsdelBlockParams):
    """Vectorised shortcut for regions ``word[rs:re+1]`` holding an intact body.

    Mirrors the first step of :func:`decode_region`: the clean readings of the
    stripped region, leading-0 guess first. A region is settled here only when
    that step would accept it outright (a codeword that parses and re-encodes
    to exactly the received bits). Returns ``(index, payloads)`` where
    ``index`` is -2 for regions left to the full decoder.
    """
    ecc = p.ecc
    width = 2 * ecc.codeword_bits
    M = rs.size
    index = np.full(M, -2, dtype=np.int64)
    payloads: dict[int, np.ndarray] = {}
    ones = np.flatnonzero(word)
    if M == 0 or ones.size == 0:
        return index, payloads
    i1 = np.searchsorted(ones, rs, side="left")
    i2 = np.searchsorted(ones, re, side="right") - 1
    nonempty = i1 <= i2
    first = ones[np.minimum(i1, ones.size - 1)]
    last = ones[np.maximum(i2, 0)]
    size = last - first + 1
    pending = nonempty.copy()
    weights = 1 << np.arange(p.idx_bits, dtype=np.int64)
    for lead, sizes in ((1, (width - 2, width - 1)), (0, (width - 1, width, width + 1))):
        rows = np.flatnonzero(pending & np.isin(size, sizes))
        if rows.size == 0:
            continue
        pos = first[rows, None] - lead + np.arange(width)
        inside = (pos >= first[rows, None]) & (pos <= last[rows, None])
        r = np.where(inside, word[np.clip(pos, 0, word.size - 1)], 0).reshape(rows.size, -1, 2)
        valid = np.all(r[:, :, 0] != r[:, :, 1], axis=1)
        coded = r[:, :, 0].astype(np.int64).reshape(rows.size, ecc.A, ecc.c)
        syms = coded @ (1 << np.arange(ecc.c, dtype=np.int64))
        is_cw = np.all(rs_encode_symbols(syms[:, : ecc.a], ecc) == syms, axis=1)
        msg = coded[:, : ecc.a].reshape(rows.size, -1)
        tail_ok = ~msg[:, p.idx_bits + p.tau :].any(axis=1)
        j = msg[:, : p.idx_bits] @ weights
        parses = valid & is_cw & tail_ok & (j != 0)
        exact = lead + size[rows] <= width
        for q in np.flatnonzero(parses & exact):
            row = int(rows[q])
            index[row] = int(j[q])
            payloads[row] = msg[q, p.idx_bits : p.idx_bits + p.tau].astype(np.uint8)
        # a parsed but inexact reading is for the full decoder to judge
        pending[rows[parses]] = False
    return index, payloads


def decode_region(region: np.ndarray, p: InsdelBlockParams):
    """Decode a candidate body (zeros around it are ignored).

    Returns ``(j, payload)`` or ``None``. Results are memoised on content.
    """
    s = _strip_zeros(np.asarray(region, dtype=np.uint8))
    if s.size == 0:
        return None
    packed = np.packbits(s, bitorder="little").tobytes()
    return _decode_region_cached(packed, s.size, p)


def scan_gaps(bits: np.ndarray, p: InsdelBlockParams, pad_left: bool, pad_right: bool):
    """Find maximal runs of low-weight window starts.

    Window starts are indexed in the coordinates of ``bits`` (0-based); the
    virtual zero padding used at word ends yields negative starts on the
    left. Returns ``(gap_start, gap_end)`` arrays, inclusive.
    """
    lam = p.lambda0
    parts = []
    off = 0
    if pad_left:
        parts.append(np.zeros(lam, dtype=np.int64))
        off = lam
    parts.append(np.asarray(bits, dtype=np.int64))
    if pad_right:
        parts.append(np.zeros(lam, dtype=np.int64))
    ext = np.concatenate(parts)
    if ext.size < lam:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    cs = np.concatenate([[0], np.cumsum(ext)])
    low = (cs[lam:] - cs[:-lam]) < p.buffer_thresh * lam
    d = np.diff(np.concatenate([[0], low.astype(np.int8), [0]]))
    starts = np.flatnonzero(d == 1) - off
    ends = np.flatnonzero(d == -1) - 1 - off
    return starts, ends


def regions_between(gs: np.ndarray, ge: np.ndarray, p: InsdelBlockParams, n: int):
    """Candidate body spans between consecutive gaps, clipped to ``[0, n-1]``.

    Region ``k`` sits between gap ``k`` and gap ``k + 1``.
    """
    rs = ge[:-1] + 1
    re = gs[1:] + p.lambda0 - 2
    return np.clip(rs, 0, n - 1), np.clip(re, 0, n - 1)


def scan_regions(bits: np.ndarray, p: InsdelBlockParams, pad_left=True, pad_right=True):
    gs, ge = scan_gaps(bits, p, pad_left, pad_right)
    rs, re = regions_between(gs, ge, p, len(bits))
    keep = rs <= re
    return list(zip(rs[keep].tolist(), re[keep].tolist()))


def nearest_region(regions, center: int) -> int | None:
    """Index of the region containing ``center``, else the closest one
    (ties go to the earlier region)."""
    best, best_d = None, None
    for idx, (s, e) in enumerate(regions):
        d = 0 if s <= center <= e else (s - center if center < s else center - e)
        if best is None or d < best_d:
            best, best_d = idx, d
    return best


def insdel_block_decode(window, p: InsdelBlockParams):
    """Decode the first verifiable block body in ``window``.

    The window's ends are treated as if surrounded by zeros. Returns
    ``(j, payload)`` or ``None``.
    """
    window = np.asarray(window, dtype=np.uint8)
    for s, e in scan_regions(window, p):
        got = decode_region(window[s : e + 1], p)
        if got is not None:
            return got
    return None


def block_decode_window(window, center: int, p: InsdelBlockParams,
                        pad_left: bool, pad_right: bool):
    """Reference single-window Block-Decode: index of the body nearest to
    ``center`` (0-based within ``window``), or ``None``."""
    window = np.asarray(window, dtype=np.uint8)
    regions = scan_regions(window, p, pad_left, pad_right)
    idx = nearest_region(regions, center)
    if idx is None:
        return None
    s, e = regions[idx]
    got = decode_region(window[s : e + 1], p)
    return None if got is None else got[0]
