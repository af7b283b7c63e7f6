"""Resource-bounded variant: the secret key travels inside the codeword,
sealed in a puzzle that costs sequential work to open.

The codeword is ``y_p || y_star``. ``y_p`` is the private-key code under a
key derived from a fresh seed; ``y_star`` is a short repetition code of a
puzzle whose solution is that seed. The decoder reads a few copies of
``y_star``, solves the puzzle, rebuilds the key and decodes ``y_p``.

The puzzle here is a toy time-lock (an iterated hash chain). It has the
right interface and the right cost asymmetry for experiments, and no
security claim.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .bits import pack_bits, unpack_bits
from .errors import DecodeFailure, InvalidInput
from .hamming_paldc import PaldcParams, paldc_dec, paldc_enc, paldc_gen
from .inner_codes import EccParams, ecc_decode, ecc_encode

PUZZLE_MAGIC = b"RBPZ1"
_CHAIN_TAG = b"aldc-chain"
_COMMIT_TAG = b"aldc-commit"


def _commit(seed: bytes) -> bytes:
    return hashlib.sha256(_COMMIT_TAG + seed).digest()


def _chain(start: bytes, T: int) -> bytes:
    x = start
    prefix = hashlib.sha256(_CHAIN_TAG)
    for _ in range(T):
        h = prefix.copy()
        h.update(x)
        x = h.digest()
    return x


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(u ^ v for u, v in zip(a, b))


@dataclass(frozen=True)
class Puzzle:
    T: int
    chain_head: bytes
    commitment: bytes

    def to_bytes(self) -> bytes:
        return PUZZLE_MAGIC + struct.pack("<Q", self.T) + self.chain_head + self.commitment

    @classmethod
    def from_bytes(cls, data: bytes) -> "Puzzle":
        if len(data) != PUZZLE_SIZE or not data.startswith(PUZZLE_MAGIC):
            raise InvalidInput("malformed puzzle")
        (T,) = struct.unpack_from("<Q", data, len(PUZZLE_MAGIC))
        off = len(PUZZLE_MAGIC) + 8
        if T < 1:
            raise InvalidInput("malformed puzzle: T < 1")
        return cls(int(T), data[off : off + 32], data[off + 32 : off + 64])


PUZZLE_SIZE = len(PUZZLE_MAGIC) + 8 + 64


def puzz_gen(seed: bytes, T: int) -> Puzzle:
    """Seal ``seed``: the chain starts at its commitment and runs ``T`` steps;
    the last link masks the seed."""
    if len(seed) != 32:
        raise InvalidInput("seed must be 32 bytes")
    if T < 1:
        raise InvalidInput("hardness T must be at least 1")
    c = _commit(seed)
    return Puzzle(T, _xor(seed, _chain(c, T)), c)


def puzz_solve(Z: Puzzle) -> bytes:
    if Z.T < 1 or len(Z.chain_head) != 32 or len(Z.commitment) != 32:
        raise InvalidInput("malformed puzzle")
    seed = _xor(Z.chain_head, _chain(Z.commitment, Z.T))
    if _commit(seed) != Z.commitment:
        raise InvalidInput("puzzle solution does not match its commitment")
    return seed


# ---------------------------------------------------------------------------
# LDC*: repetition of an RS-encoded short payload

@dataclass(frozen=True)
class LdcStarParams:
    payload_len: int
    copies: int = 9
    sample_copies: int = 5
    ecc: EccParams = field(default_factory=EccParams)
    chunk: int = 32

    def __post_init__(self):
        if self.payload_len <= 0 or self.payload_len % self.ecc.message_bits:
            raise InvalidInput("payload_len must be a positive multiple of the ECC message size")
        if self.sample_copies % 2 == 0 or not 1 <= self.sample_copies <= self.copies:
            raise InvalidInput("sample_copies must be odd and at most copies")
        if self.copy_len % self.chunk:
            raise InvalidInput("copy length must be a multiple of the read chunk")

    @property
    def ecc_blocks(self) -> int:
        return self.payload_len // self.ecc.message_bits

    @property
    def copy_len(self) -> int:
        return self.ecc_blocks * self.ecc.codeword_bits

    @property
    def n_star(self) -> int:
        return self.copies * self.copy_len

    @property
    def max_queries(self) -> int:
        return self.sample_copies * self.copy_len


def ldcstar_encode(payload, p: LdcStarParams) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.size != p.payload_len:
        raise InvalidInput(f"expected {p.payload_len} payload bits, got {payload.size}")
    mb = p.ecc.message_bits
    one = np.concatenate([ecc_encode(payload[i : i + mb], p.ecc) for i in range(0, p.payload_len, mb)])
    return np.tile(one, p.copies)


def _decode_copy(oracle, start: int, p: LdcStarParams):
    ranges = [(s, s + p.chunk - 1) for s in range(start, start + p.copy_len, p.chunk)]
    bits = np.concatenate(oracle.read_ranges(ranges))
    masks = [oracle.erased(u, v) for u, v in ranges]
    erased = None
    if any(mk is not None for mk in masks):
        erased = np.concatenate([np.zeros(p.chunk, bool) if mk is None else mk for mk in masks])
    cb = p.ecc.codeword_bits
    parts = []
    for b in range(p.ecc_blocks):
        sl = slice(b * cb, (b + 1) * cb)
        parts.append(ecc_decode(bits[sl], p.ecc, None if erased is None else erased[sl]))
    return np.concatenate(parts)


def ldcstar_decode(oracle, p: LdcStarParams, rng: np.random.Generator) -> np.ndarray:
    """Majority over ``sample_copies`` random copies; a copy whose ECC
    decoding fails casts no vote."""
    if oracle.length != p.n_star:
        raise InvalidInput("oracle length does not match LDC* parameters")
    picks = rng.choice(p.copies, size=p.sample_copies, replace=False)
    votes: dict[bytes, int] = {}
    values: dict[bytes, np.ndarray] = {}
    for c in sorted(picks.tolist()):
        try:
            got = _decode_copy(oracle, c * p.copy_len + 1, p)
        except DecodeFailure:
            continue
        key = got.tobytes()
        votes[key] = votes.get(key, 0) + 1
        values[key] = got
    if votes:
        key, n = max(votes.items(), key=lambda kv: kv[1])
        if 2 * n > p.sample_copies:
            return values[key]
    raise DecodeFailure("no majority among sampled LDC* copies")


# ---------------------------------------------------------------------------
# raLDC

@dataclass(frozen=True)
class RaldcParams:
    paldc: PaldcParams = field(default_factory=PaldcParams)
    T: int = 1 << 14
    copies: int = 9
    sample_copies: int = 5

    @property
    def star(self) -> LdcStarParams:
        mb = self.paldc.ecc.message_bits
        payload = -(-8 * PUZZLE_SIZE // mb) * mb
        return LdcStarParams(payload, self.copies, self.sample_copies, self.paldc.ecc, self.paldc.t)

    @property
    def m(self) -> int:
        return self.paldc.m

    @property
    def n(self) -> int:
        return self.paldc.m + self.star.n_star


def _puzzle_bits(Z: Puzzle, p: LdcStarParams) -> np.ndarray:
    bits = np.zeros(p.payload_len, dtype=np.uint8)
    raw = unpack_bits(Z.to_bytes(), 8 * PUZZLE_SIZE)
    bits[: raw.size] = raw
    return bits


def raldc_enc(x, params: RaldcParams, seed: bytes) -> np.ndarray:
    """Encode ``x`` under a key drawn from ``seed`` and embed the sealed seed."""
    sk = paldc_gen(params.paldc, seed)
    y_p = paldc_enc(sk, x, params.paldc)
    y_star = ldcstar_encode(_puzzle_bits(puzz_gen(seed, params.T), params.star), params.star)
    return np.concatenate([y_p, y_star])


def raldc_dec(oracle, L: int, R: int, params: RaldcParams, rng: np.random.Generator,
              trace: dict | None = None) -> np.ndarray:
    """Open the puzzle from ``y_star`` then decode ``[L, R]`` from ``y_p``.

    The two regions are read through separate views, so their query logs
    stay apart (see ``trace["yp_log"]`` and ``trace["ystar_log"]``).
    """
    if oracle.length != params.n:
        raise InvalidInput("oracle length does not match raLDC parameters")
    star = params.star
    v_star = oracle.view(params.m, star.n_star)
    v_p = oracle.view(0, params.m)
    if trace is not None:
        trace["ystar_log"] = v_star.log
        trace["yp_log"] = v_p.log
    bits = ldcstar_decode(v_star, star, rng)
    try:
        Z = Puzzle.from_bytes(pack_bits(bits[: 8 * PUZZLE_SIZE]))
        seed = puzz_solve(Z)
    except InvalidInput as exc:
        raise DecodeFailure(f"puzzle unrecoverable: {exc}") from None
    sk = paldc_gen(params.paldc, seed)
    return paldc_dec(sk, v_p, L, R, params.paldc)
