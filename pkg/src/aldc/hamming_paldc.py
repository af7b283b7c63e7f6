"""Private-key amortized LDC for Hamming errors.

Each ``c*a``-bit message block is RS-encoded to ``c*A`` bits and cut into
``beta_sub`` sub-blocks of ``t`` bits. A secret permutation scatters all
sub-blocks over the codeword and a secret one-time pad masks it, so a
channel that does not know the key cannot aim its flips at one block.
Decoding an interval reads, for every block it touches, that block's
sub-blocks: whole ``t``-bit aligned ranges and nothing else.
"""

from __future__ import annotations

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from .bits import pack_bits, unpack_bits
from .errors import DecodeFailure, InvalidInput
from .inner_codes import EccParams, ecc_decode, ecc_encode

KEY_MAGIC = b"PALDCK1"


@dataclass(frozen=True)
class PaldcParams:
    k: int = 1 << 14
    a: int = 16
    A: int = 32
    c: int = 8
    t: int = 32
    security_lambda: int = 128
    safety: float = 1.0

    @property
    def ecc(self) -> EccParams:
        return EccParams(a=self.a, A=self.A, c=self.c)

    @property
    def block_bits(self) -> int:
        return self.c * self.a

    @property
    def coded_bits(self) -> int:
        return self.c * self.A

    @property
    def beta_sub(self) -> int:
        return self.coded_bits // self.t

    @property
    def n_blocks(self) -> int:
        return self.k // self.block_bits

    @property
    def m(self) -> int:
        return self.n_blocks * self.coded_bits

    @property
    def n_sub(self) -> int:
        return self.m // self.t

    @property
    def rate(self) -> float:
        return self.a / self.A

    def problems(self) -> list[str]:
        out = []
        if not 0 < self.a < self.A:
            out.append("need 0 < a < A")
        if self.A > (1 << self.c) - 1:
            out.append(f"A={self.A} too long for GF(2^{self.c})")
        if self.t <= 0 or self.coded_bits % self.t:
            out.append(f"t={self.t} does not divide cA={self.coded_bits}")
        if self.k <= 0 or self.k % self.block_bits:
            out.append(f"ca={self.block_bits} does not divide k={self.k}")
        return out

    def margin(self) -> float:
        """``a / (t * log2(lambda))``; the error bound wants this large."""
        return self.a / (self.t * math.log2(self.security_lambda))

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise InvalidInput("; ".join(probs))
        if self.margin() < self.safety:
            warnings.warn(
                f"a/(t log2 lambda) = {self.margin():.3f} is below {self.safety}; "
                "the per-block error concentration bound is weak at these sizes",
                stacklevel=3,
            )


@dataclass(frozen=True)
class SecretKey:
    pi: np.ndarray  # pi[i-1] = sub-block placed at slot i (1-based values)
    r: np.ndarray   # m-bit mask
    m: int
    t: int

    def __post_init__(self):
        n = self.m // self.t
        if self.t <= 0 or self.m % self.t or self.r.size != self.m or self.pi.size != n:
            raise InvalidInput("inconsistent key dimensions")
        if not np.array_equal(np.sort(self.pi), np.arange(1, n + 1)):
            raise InvalidInput("pi is not a permutation")

    @property
    def pi_inv(self) -> np.ndarray:
        inv = np.empty_like(self.pi)
        inv[self.pi - 1] = np.arange(1, self.pi.size + 1)
        return inv

    def to_bytes(self) -> bytes:
        return (KEY_MAGIC + struct.pack("<QQ", self.m, self.t)
                + self.pi.astype("<u4").tobytes() + pack_bits(self.r))

    @classmethod
    def from_bytes(cls, data: bytes) -> "SecretKey":
        head = len(KEY_MAGIC) + 16
        if len(data) < head or not data.startswith(KEY_MAGIC):
            raise InvalidInput("not a secret key file")
        m, t = struct.unpack_from("<QQ", data, len(KEY_MAGIC))
        if t == 0 or m % t:
            raise InvalidInput("bad key dimensions")
        n = m // t
        need = head + 4 * n + (m + 7) // 8
        if len(data) != need:
            raise InvalidInput(f"key file has {len(data)} bytes, expected {need}")
        pi = np.frombuffer(data, dtype="<u4", count=n, offset=head).astype(np.int64)
        r = unpack_bits(data[head + 4 * n :], m)
        return cls(pi, r, int(m), int(t))


def keyed_rng(seed: bytes, domain: bytes) -> np.random.Generator:
    """Counter-mode generator keyed by ``SHA-256(domain || seed)``."""
    digest = hashlib.sha256(domain + bytes(seed)).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def paldc_gen(params: PaldcParams, seed: bytes) -> SecretKey:
    params.validate()
    if len(seed) != 32:
        raise InvalidInput("seed must be 32 bytes")
    rng = keyed_rng(seed, b"paldc-gen")
    pi = rng.permutation(params.n_sub) + 1
    r = rng.integers(0, 2, params.m, dtype=np.uint8)
    return SecretKey(pi.astype(np.int64), r, params.m, params.t)


def _check_key(sk: SecretKey, params: PaldcParams) -> None:
    if sk.m != params.m or sk.t != params.t:
        raise InvalidInput("key does not match the code parameters")


def paldc_enc(sk: SecretKey, x, params: PaldcParams) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint8)
    _check_key(sk, params)
    if x.size != params.k:
        raise InvalidInput(f"expected {params.k} message bits, got {x.size}")
    ecc = params.ecc
    blocks = x.reshape(params.n_blocks, params.block_bits)
    coded = np.stack([ecc_encode(b, ecc) for b in blocks])
    subs = coded.reshape(params.n_sub, params.t)  # sub-block i at row i-1
    return subs[sk.pi - 1].reshape(-1) ^ sk.r


def _blocks_for(L: int, R: int, params: PaldcParams) -> range:
    if not 1 <= L <= R <= params.k:
        raise InvalidInput(f"interval [{L}, {R}] outside [1, {params.k}]")
    bb = params.block_bits
    return range((L - 1) // bb + 1, (R - 1) // bb + 2)


def _slots(j: int, sk: SecretKey, params: PaldcParams, inv: np.ndarray) -> np.ndarray:
    # sub-blocks (j-1)*beta_sub + r, r = 1..beta_sub, sit at slots pi^{-1}(.)
    subs = (j - 1) * params.beta_sub + np.arange(1, params.beta_sub + 1)
    return inv[subs - 1]


def query_plan(L: int, R: int, sk: SecretKey, params: PaldcParams) -> list[tuple[int, int]]:
    """The ranges ``paldc_dec`` reads for ``[L, R]``, in read order."""
    _check_key(sk, params)
    inv = sk.pi_inv
    t = params.t
    plan = []
    for j in _blocks_for(L, R, params):
        plan.extend(((int(s) - 1) * t + 1, int(s) * t) for s in _slots(j, sk, params, inv))
    return plan


def paldc_dec(sk: SecretKey, oracle, L: int, R: int, params: PaldcParams) -> np.ndarray:
    """Recover ``x[L..R]``; raises :class:`DecodeFailure` if any block fails.

    If the oracle reports erased positions (as the insdel simulation does
    for blocks it could not locate), the affected symbols are decoded as
    erasures.
    """
    _check_key(sk, params)
    if oracle.length != params.m:
        raise InvalidInput("oracle length does not match the code")
    plan = query_plan(L, R, sk, params)
    chunks = oracle.read_ranges(plan)
    per = params.beta_sub
    ecc = params.ecc
    out = []
    for idx, j in enumerate(_blocks_for(L, R, params)):
        word, gone, any_gone = [], [], False
        for (u, v), chunk in zip(plan[idx * per : (idx + 1) * per], chunks[idx * per : (idx + 1) * per]):
            word.append(np.asarray(chunk, dtype=np.uint8) ^ sk.r[u - 1 : v])
            mask = oracle.erased(u, v)
            any_gone |= mask is not None
            gone.append(np.zeros(v - u + 1, dtype=bool) if mask is None else mask)
        erased = np.concatenate(gone) if any_gone else None
        try:
            out.append(ecc_decode(np.concatenate(word), ecc, erased))
        except DecodeFailure as exc:
            raise DecodeFailure(f"block {j}: {exc}") from None
    bb = params.block_bits
    first = (L - 1) // bb * bb
    return np.concatenate(out)[L - 1 - first : R - first]
