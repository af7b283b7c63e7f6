"""Corruption strategies with ground-truth edit scripts, and the good-block
analysis used to judge what the insdel decoder ought to recover.

Edit scripts address the *clean* word with 1-based positions. Within one
position, insertions come first (in listed order) and then at most one
deletion or substitution of the clean bit at that position. Insertion
position ``n + 1`` appends.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bits import as_bits
from .editdistance import indel_distance
from .errors import InvalidInput

HAMMING_STRATEGIES = ("uniform_random", "prefix_burst", "block_targeting")
INSDEL_STRATEGIES = ("uniform_indel", "burst_delete", "buffer_zeroing", "block_kill")


@dataclass(frozen=True)
class EditOp:
    pos: int
    kind: str  # "I", "D" or "S"
    bit: int | None = None


@dataclass
class EditScript:
    ops: list[EditOp] = field(default_factory=list)

    def cost(self) -> int:
        """Insertions and deletions count 1, substitutions 2."""
        return sum(2 if op.kind == "S" else 1 for op in self.ops)

    def counts(self) -> dict[str, int]:
        out = {"I": 0, "D": 0, "S": 0}
        for op in self.ops:
            out[op.kind] += 1
        return out

    def to_text(self) -> str:
        lines = []
        for op in self.ops:
            lines.append(f"D {op.pos}" if op.kind == "D" else f"{op.kind} {op.pos} {op.bit}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "EditScript":
        ops = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            parts = raw.split()
            if not parts:
                continue
            try:
                kind = parts[0]
                if kind == "D" and len(parts) == 2:
                    ops.append(EditOp(int(parts[1]), "D"))
                elif kind in ("I", "S") and len(parts) == 3 and parts[2] in ("0", "1"):
                    ops.append(EditOp(int(parts[1]), kind, int(parts[2])))
                else:
                    raise ValueError
            except ValueError:
                raise InvalidInput(f"bad edit script line {lineno}: {raw!r}") from None
        return cls(ops)


def _apply_with_origin(ops: Iterable[EditOp], clean) -> tuple[np.ndarray, np.ndarray]:
    """Corrupted word plus, per output bit, its clean position (0 = inserted)."""
    clean = as_bits(clean)
    n = clean.size
    vals = clean.copy()
    keep = np.ones(n, dtype=bool)
    touched = np.zeros(n + 2, dtype=bool)
    ins_pos, ins_bit = [], []
    for op in ops:
        if op.kind == "I":
            if not 1 <= op.pos <= n + 1 or op.bit not in (0, 1):
                raise InvalidInput(f"bad insertion {op}")
            ins_pos.append(op.pos - 1)
            ins_bit.append(op.bit)
            continue
        if not 1 <= op.pos <= n:
            raise InvalidInput(f"edit position {op.pos} outside [1, {n}]")
        if touched[op.pos]:
            raise InvalidInput(f"position {op.pos} deleted or substituted twice")
        touched[op.pos] = True
        if op.kind == "D":
            keep[op.pos - 1] = False
        elif op.kind == "S":
            if op.bit not in (0, 1):
                raise InvalidInput(f"bad substitution {op}")
            vals[op.pos - 1] = op.bit
        else:
            raise InvalidInput(f"unknown edit kind {op.kind!r}")
    origin = np.arange(1, n + 1, dtype=np.int64)
    if ins_pos:
        order = np.argsort(np.asarray(ins_pos), kind="stable")
        idx = np.asarray(ins_pos)[order]
        bits = np.asarray(ins_bit, dtype=np.uint8)[order]
        vals = np.insert(vals, idx, bits)
        keep = np.insert(keep, idx, True)
        origin = np.insert(origin, idx, 0)
    return vals[keep], origin[keep]


def apply(script: EditScript | Iterable[EditOp], clean) -> np.ndarray:
    ops = script.ops if isinstance(script, EditScript) else script
    return _apply_with_origin(ops, clean)[0]


# ---------------------------------------------------------------------------
# Hamming channel

def corrupt_hamming(y, delta: float, strategy: str, seed: int,
                    block_bits: int = 256) -> np.ndarray:
    """Flip at most ``floor(delta*|y|)`` bits.

    ``block_targeting`` flips whole aligned ``block_bits`` chunks, picked at
    random, which is the natural attack on a code without a hidden
    permutation.
    """
    y = as_bits(y)
    if strategy not in HAMMING_STRATEGIES:
        raise InvalidInput(f"unknown Hamming strategy {strategy!r}")
    if delta < 0:
        raise InvalidInput("delta must be non-negative")
    n = y.size
    f = min(n, int(np.floor(delta * n)))
    out = y.copy()
    if f == 0:
        return out
    rng = np.random.default_rng(seed)
    if strategy == "uniform_random":
        pos = rng.choice(n, size=f, replace=False)
    elif strategy == "prefix_burst":
        pos = np.arange(f)
    else:
        nchunks = -(-n // block_bits)
        pos = []
        for c in rng.permutation(nchunks):
            chunk = np.arange(c * block_bits, min(n, (c + 1) * block_bits))
            pos.extend(chunk[: f - len(pos)].tolist())
            if len(pos) >= f:
                break
        pos = np.asarray(pos, dtype=np.int64)
    out[pos] ^= 1
    return out


# ---------------------------------------------------------------------------
# insdel channel

def corrupt_insdel(Y, delta: float, strategy: str, seed: int,
                   layout: tuple[int, int] | None = None):
    """Corrupt ``Y`` within an edit budget of ``floor(2*delta*|Y|)``.

    ``layout`` is ``(blk_len, buffer_len)`` and is needed by the strategies
    that aim at block structure (``buffer_zeroing``, ``block_kill``).
    Returns ``(corrupted, script)``.
    """
    Y = as_bits(Y)
    if strategy not in INSDEL_STRATEGIES:
        raise InvalidInput(f"unknown insdel strategy {strategy!r}")
    if delta < 0:
        raise InvalidInput("delta must be non-negative")
    if strategy in ("buffer_zeroing", "block_kill") and layout is None:
        raise InvalidInput(f"{strategy} needs the block layout")
    n = Y.size
    budget = int(np.floor(2 * delta * n))
    rng = np.random.default_rng(seed)
    ops: list[EditOp] = []
    if budget > 0:
        if strategy == "uniform_indel":
            ops = _uniform_indel(n, budget, rng)
        elif strategy == "burst_delete":
            run = min(budget, n)
            start = int(rng.integers(1, n - run + 2))
            ops = [EditOp(p, "D") for p in range(start, start + run)]
        elif strategy == "buffer_zeroing":
            ops = _buffer_attack(n, budget, layout, rng)
        else:
            ops = _block_kill(n, budget, layout, rng)
    script = EditScript(ops)
    return apply(script, Y), script


def _uniform_indel(n, budget, rng):
    n_del = min(int(rng.binomial(budget, 0.5)), n)
    n_ins = budget - n_del
    dels = rng.choice(n, size=n_del, replace=False) + 1
    ins = rng.integers(1, n + 2, size=n_ins)
    bits = rng.integers(0, 2, size=n_ins)
    ops = [EditOp(int(p), "D") for p in dels]
    ops += [EditOp(int(p), "I", int(b)) for p, b in zip(ins, bits)]
    ops.sort(key=lambda op: (op.pos, op.kind != "I"))
    return ops


def _buffer_attack(n, budget, layout, rng):
    """Write ones into the zero runs between blocks.

    Every other bit of the combined buffer at a block boundary becomes 1,
    so the run stops looking like a gap. Boundaries are hit in random order
    until the budget (2 per substitution) runs out.
    """
    blk_len, buf = layout
    B = n // blk_len
    ops = []
    left = budget
    for k in rng.permutation(max(B - 1, 0)) + 1:
        start = k * blk_len - buf + 1
        for p in range(start, start + 2 * buf, 2):
            if left < 2:
                break
            ops.append(EditOp(p, "S", 1))
            left -= 2
        if left < 2:
            break
    ops.sort(key=lambda op: op.pos)
    return ops


def _block_kill(n, budget, layout, rng):
    blk_len, _ = layout
    B = n // blk_len
    ops = []
    for j in rng.permutation(B):
        if len(ops) + blk_len > budget:
            break
        ops.extend(EditOp(p, "D") for p in range(j * blk_len + 1, (j + 1) * blk_len + 1))
    ops.sort(key=lambda op: op.pos)
    return ops


# ---------------------------------------------------------------------------
# block decomposition and health

def derive_block_map(script: EditScript, B: int, blk_len: int) -> np.ndarray:
    """Non-decreasing map from corrupted positions to blocks (1-based values).

    Surviving and substituted bits map to their own block; inserted bits
    join the block of the nearest surviving bit before them (block 1 if
    there is none).
    """
    n = B * blk_len
    dummy = np.zeros(n, dtype=np.uint8)
    _, origin = _apply_with_origin(script.ops, dummy)
    blocks = np.where(origin > 0, (origin - 1) // blk_len + 1, 0)
    filled = np.maximum.accumulate(blocks) if blocks.size else blocks
    return np.where(filled == 0, 1, filled).astype(np.int64)


@dataclass
class BlockHealth:
    costs: np.ndarray       # ED of each corrupted block against its clean form
    sizes: np.ndarray       # |preimage| of each block
    good: np.ndarray        # gamma-good
    local_good: np.ndarray  # (theta, gamma)-local-good
    gamma_tau: float

    @property
    def frac_bad(self) -> float:
        return float(1 - self.good.mean()) if self.good.size else 0.0

    @property
    def frac_local_bad(self) -> float:
        return float(1 - self.local_good.mean()) if self.local_good.size else 0.0


def bad_intervals_cover(costs: np.ndarray, good: np.ndarray, gamma_tau: float, theta: float) -> np.ndarray:
    """Mark blocks lying in at least one (theta, gamma)-bad block interval.

    Every interval ``[a, b]`` is checked (quadratic in ``B``, row by row).
    """
    B = costs.size
    csum = np.concatenate([[0.0], np.cumsum(costs, dtype=np.float64)])
    bsum = np.concatenate([[0], np.cumsum(~good)])
    covered_to = np.full(B, -1, dtype=np.int64)
    for a in range(B):
        b = np.arange(a, B)
        width = b - a + 1
        bad = (csum[b + 1] - csum[a] > gamma_tau * width) | (bsum[b + 1] - bsum[a] > theta * width)
        hits = np.flatnonzero(bad)
        if hits.size:
            covered_to[a] = a + hits[-1]
    # block j is covered iff some a <= j has covered_to[a] >= j
    reach = np.maximum.accumulate(covered_to)
    return reach >= np.arange(B)


def classify_blocks(Y, Y_tilde, block_map, p) -> BlockHealth:
    """Exact good / local-good classification against the clean word."""
    Y = as_bits(Y)
    Y_tilde = as_bits(Y_tilde)
    block_map = np.asarray(block_map, dtype=np.int64)
    if block_map.size != Y_tilde.size:
        raise InvalidInput("block map and corrupted word differ in length")
    blk = p.blk_len
    B = Y.size // blk
    starts = np.searchsorted(block_map, np.arange(1, B + 2), side="left")
    costs = np.empty(B, dtype=np.int64)
    for j in range(B):
        piece = Y_tilde[starts[j] : starts[j + 1]]
        clean = Y[j * blk : (j + 1) * blk]
        costs[j] = 0 if np.array_equal(piece, clean) else indel_distance(piece, clean)
    gamma_tau = p.gamma * p.tau
    good = costs <= gamma_tau
    local_bad = bad_intervals_cover(costs, good, gamma_tau, p.theta)
    return BlockHealth(costs, np.diff(starts), good, ~local_bad, gamma_tau)


def bad_block_bounds(delta: float, p) -> tuple[float, float]:
    """Worst-case fractions of gamma-bad and local-bad blocks at budget ``delta``."""
    g, f, b, th = p.gamma, p.pad_rate, p.beta, p.theta
    return 2 * delta * b / (g * f), (4 / (g * f)) * (1 + 1 / th) * delta * b


def size_bounds(p, pad_factor: bool = False) -> tuple[float, float]:
    """Length window of a gamma-good block's preimage.

    A good block is within ``gamma*tau`` edits of ``blk_len`` bits, so its
    length lies in ``[(beta-gamma)tau, (beta+gamma)tau]``. ``pad_factor``
    gives the narrower window with gamma scaled by the padding rate, which
    does not hold in general (see the tests for a counterexample).
    """
    g = p.gamma * (p.pad_rate if pad_factor else 1.0)
    return (p.beta - g) * p.tau, (p.beta + g) * p.tau
