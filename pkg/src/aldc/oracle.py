"""Query-counting access to (possibly corrupted) codewords.

Decoders never see a codeword directly. They get an oracle, read ranges
``[l, r]`` (1-based, inclusive) from it, and every bit read is charged,
repeats included. The log keeps the exact ranges so tests can check
the shape of a decoder's access pattern, not only its volume.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .bits import as_bits
from .errors import InvalidInput, QueryRangeError


class QueryLog:
    """Ordered record of range reads.

    Bulk reads (the insdel search issues thousands per call) are kept as
    numpy chunks; ``ranges`` materialises them on demand.
    """

    def __init__(self) -> None:
        # each chunk is (lo, hi) or, for windows logged by centre, (centers, half, n)
        self._chunks: list[tuple] = []
        self.total = 0

    def add(self, l: int, r: int) -> None:
        self.add_many(np.array([l], dtype=np.int64), np.array([r], dtype=np.int64))

    def add_many(self, lo: np.ndarray, hi: np.ndarray, copy: bool = True) -> None:
        lo, hi = np.asarray(lo), np.asarray(hi)
        if lo.dtype.kind not in "iu" or hi.dtype.kind not in "iu":
            lo, hi = lo.astype(np.int64), hi.astype(np.int64)
        if lo.size == 0:
            return
        self._chunks.append((lo.copy(), hi.copy()) if copy else (lo, hi))
        self.total += int((hi - lo + 1).sum())

    def add_windows(self, centers: np.ndarray, half: int, n: int, total: int) -> None:
        """Windows ``[max(1, c - half), min(n, c + half)]`` for each centre.

        The caller supplies their summed length. Ranges are expanded only
        when someone asks for them.
        """
        if centers.size:
            self._chunks.append((centers, half, n))
            self.total += int(total)

    @staticmethod
    def _expand(chunk):
        if len(chunk) == 2:
            return chunk
        c, half, n = chunk
        c = c.reshape(-1).astype(np.int64)
        return np.maximum(c - half, 1), np.minimum(c + half, n)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self._chunks:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        parts = [self._expand(ch) for ch in self._chunks]
        return (np.concatenate([lo for lo, _ in parts]).astype(np.int64, copy=False),
                np.concatenate([hi for _, hi in parts]).astype(np.int64, copy=False))

    @property
    def ranges(self) -> list[tuple[int, int]]:
        lo, hi = self.arrays()
        return list(zip(lo.tolist(), hi.tolist()))

    def __len__(self) -> int:
        return sum(ch[0].size for ch in self._chunks)


def is_t_consecutive(log: QueryLog, t: int) -> bool:
    """True if the log is a set of pairwise disjoint ranges of exactly ``t`` bits."""
    lo, hi = log.arrays()
    if lo.size == 0:
        return True
    if np.any(hi - lo + 1 != t):
        return False
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    return bool(np.all(lo[1:] > hi[:-1]))


class BitOracle:
    """Common read/validate/log logic; subclasses supply ``_fetch_many``."""

    def __init__(self, length: int) -> None:
        self.length = int(length)
        self.log = QueryLog()

    @property
    def queries_used(self) -> int:
        return self.log.total

    def _check(self, l: int, r: int) -> None:
        if not (1 <= l <= r <= self.length):
            raise QueryRangeError(f"range [{l}, {r}] outside [1, {self.length}]")

    def read_range(self, l: int, r: int) -> np.ndarray:
        return self.read_ranges([(l, r)])[0]

    def read_ranges(self, ranges: Sequence[tuple[int, int]]) -> list[np.ndarray]:
        ranges = [(int(l), int(r)) for l, r in ranges]
        for l, r in ranges:
            self._check(l, r)
        if ranges:
            lo, hi = zip(*ranges)
            self.log.add_many(np.array(lo), np.array(hi))
        return self._fetch_many(ranges)

    def erased(self, l: int, r: int) -> np.ndarray | None:
        """Positions in ``[l, r]`` known to be unreliable, or ``None``."""
        return None

    def view(self, offset: int, length: int) -> "OracleView":
        return OracleView(self, offset, length)

    def _fetch_many(self, ranges: list[tuple[int, int]]) -> list[np.ndarray]:
        raise NotImplementedError


class CorruptedOracle(BitOracle):
    """Oracle over a concrete received word.

    ``shared`` is a scratch dictionary for derived data that depends only on
    the word's content (e.g. the insdel block scan). Oracles made with
    ``fresh()`` share it but start with an empty query log.
    """

    def __init__(self, word, shared: dict | None = None) -> None:
        word = as_bits(word)
        if word.flags.writeable:
            word = word.copy()
            word.setflags(write=False)
        if word.size == 0:
            raise InvalidInput("oracle over an empty word")
        super().__init__(word.size)
        self.content = word
        self.shared = {} if shared is None else shared

    def fresh(self) -> "CorruptedOracle":
        return CorruptedOracle(self.content, shared=self.shared)

    def charge(self, lo: np.ndarray, hi: np.ndarray, checked: bool = False) -> None:
        """Record a batch of window reads whose bits are consumed through
        content-derived tables rather than returned as arrays.

        ``checked=True`` means the caller built the ranges inside the word
        and hands the arrays over (they are stored without copying).
        """
        if not checked:
            lo = np.asarray(lo, dtype=np.int64)
            hi = np.asarray(hi, dtype=np.int64)
        if not checked and lo.size and (lo.min() < 1 or hi.max() > self.length or np.any(lo > hi)):
            raise QueryRangeError("charged window outside the word")
        self.log.add_many(lo, hi, copy=not checked)

    def charge_windows(self, centers: np.ndarray, half: int, total: int) -> None:
        """Charge windows of half-width ``half`` around in-range ``centers``
        (held by reference); ``total`` is their summed length."""
        self.log.add_windows(centers, half, self.length, total)

    def _fetch_many(self, ranges):
        return [self.content[l - 1 : r] for l, r in ranges]


class OracleView(BitOracle):
    """Window ``[offset + 1, offset + length]`` of a parent oracle.

    Reads are logged here in local coordinates and in the parent in
    absolute ones, so per-region accounting falls out for free.
    """

    def __init__(self, parent: BitOracle, offset: int, length: int) -> None:
        if offset < 0 or offset + length > parent.length or length <= 0:
            raise QueryRangeError("view does not fit inside the parent oracle")
        super().__init__(length)
        self.parent = parent
        self.offset = offset

    def _fetch_many(self, ranges):
        shifted = [(l + self.offset, r + self.offset) for l, r in ranges]
        return self.parent.read_ranges(shifted)

    def erased(self, l, r):
        return self.parent.erased(l + self.offset, r + self.offset)


def open_oracle(word) -> CorruptedOracle:
    return CorruptedOracle(word)


def total_queries(oracles: Iterable[BitOracle]) -> int:
    return sum(o.queries_used for o in oracles)
