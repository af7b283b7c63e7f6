"""Bit-string helpers.

Bit strings are one-dimensional ``uint8`` numpy arrays holding 0/1 values.
Everything that crosses a file or byte boundary is packed LSB-first.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import InvalidInput


def as_bits(x) -> np.ndarray:
    """Coerce ``x`` to a 0/1 ``uint8`` array, rejecting anything else."""
    if isinstance(x, str):
        x = [int(ch) for ch in x]
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise InvalidInput("bit string must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise InvalidInput("bit string contains values other than 0/1")
    return arr.astype(np.uint8, copy=False)


def random_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def bits_to_str(bits) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits))


def int_to_bits(value: int, width: int) -> np.ndarray:
    """LSB-first fixed-width encoding of a non-negative integer."""
    if value < 0 or value >> width:
        raise InvalidInput(f"{value} does not fit in {width} bits")
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for i, b in enumerate(np.asarray(bits)):
        out |= int(b) << i
    return out


def pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def unpack_bits(data: bytes, nbits: int) -> np.ndarray:
    arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if arr.size < nbits:
        raise InvalidInput("not enough bytes for requested bit count")
    return arr[:nbits].astype(np.uint8)


def bits_to_symbols(bits: np.ndarray, c: int) -> np.ndarray:
    """Group bits into ``c``-bit symbols (LSB-first within a symbol)."""
    b = np.asarray(bits, dtype=np.int64).reshape(-1, c)
    return b @ (1 << np.arange(c, dtype=np.int64))


def symbols_to_bits(symbols, c: int) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.int64)
    return ((s[:, None] >> np.arange(c)) & 1).astype(np.uint8).reshape(-1)


# -- bit files: 8-byte little-endian bit count, then the packed bits ---------

def encode_bitfile(bits) -> bytes:
    bits = as_bits(bits)
    return struct.pack("<Q", bits.size) + pack_bits(bits)


def decode_bitfile(data: bytes) -> np.ndarray:
    if len(data) < 8:
        raise InvalidInput("bit file is shorter than its 8-byte header")
    (nbits,) = struct.unpack_from("<Q", data, 0)
    body = data[8:]
    if len(body) != (nbits + 7) // 8:
        raise InvalidInput("bit file length does not match its header")
    return unpack_bits(body, nbits)


def write_bitfile(path, bits) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_bitfile(bits))


def read_bitfile(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_bitfile(fh.read())
