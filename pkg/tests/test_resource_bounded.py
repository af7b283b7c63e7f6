import hashlib
import time

import numpy as np
import pytest

from aldc.channels import corrupt_hamming
from aldc.errors import DecodeFailure, InvalidInput
from aldc.hamming_paldc import PaldcParams, paldc_dec, paldc_gen
from aldc.oracle import CorruptedOracle, is_t_consecutive
from aldc.resource_bounded import (
    PUZZLE_SIZE,
    LdcStarParams,
    Puzzle,
    RaldcParams,
    ldcstar_decode,
    ldcstar_encode,
    puzz_gen,
    puzz_solve,
    raldc_dec,
    raldc_enc,
)


def seed(i):
    return hashlib.sha256(b"test-seed" + i.to_bytes(4, "little")).digest()


# -- puzzle -----------------------------------------------------------------

def test_single_step_puzzle():
    s = seed(0)
    assert puzz_solve(puzz_gen(s, 1)) == s


def test_round_trip_many_seeds():
    for i in range(100):
        assert puzz_solve(puzz_gen(seed(i), 1 << 10)) == seed(i)


def test_puzzle_deterministic_and_serializable():
    a, b = puzz_gen(seed(3), 77), puzz_gen(seed(3), 77)
    assert a == b
    raw = a.to_bytes()
    assert len(raw) == PUZZLE_SIZE and raw.startswith(b"RBPZ1")
    assert Puzzle.from_bytes(raw) == a


def test_tampered_head_is_rejected():
    Z = puzz_gen(seed(4), 50)
    bad = Puzzle(Z.T, bytes([Z.chain_head[0] ^ 1]) + Z.chain_head[1:], Z.commitment)
    with pytest.raises(InvalidInput):
        puzz_solve(bad)


def test_bad_hardness_and_format():
    with pytest.raises(InvalidInput):
        puzz_gen(seed(0), 0)
    with pytest.raises(InvalidInput):
        Puzzle.from_bytes(b"RBPZ1" + bytes(10))


def test_solve_time_scales_linearly():
    def best(T):
        Z = puzz_gen(seed(9), T)
        runs = []
        for _ in range(3):
            t0 = time.perf_counter()
            puzz_solve(Z)
            runs.append(time.perf_counter() - t0)
        return min(runs)

    ratio = best(1 << 20) / best(1 << 19)
    assert 2 * 0.7 <= ratio <= 2 * 1.3, ratio


# -- LDC* -------------------------------------------------------------------

def star(copies=9, sample=5):
    return LdcStarParams(payload_len=640, copies=copies, sample_copies=sample)


def test_ldcstar_round_trip_and_length(rng):
    p = star()
    payload = rng.integers(0, 2, p.payload_len, dtype=np.uint8)
    y = ldcstar_encode(payload, p)
    assert y.size == p.copies * p.ecc.A * p.ecc.c * p.ecc_blocks
    o = CorruptedOracle(y)
    assert np.array_equal(ldcstar_decode(o, p, rng), payload)
    assert o.queries_used == p.sample_copies * p.copy_len == p.max_queries


@pytest.mark.parametrize("copies", [5, 9])
def test_any_single_destroyed_copy_is_outvoted(copies, rng):
    p = star(copies, 5)
    payload = rng.integers(0, 2, p.payload_len, dtype=np.uint8)
    y = ldcstar_encode(payload, p)
    for c in range(copies):
        bad = y.copy()
        bad[c * p.copy_len : (c + 1) * p.copy_len] = rng.integers(0, 2, p.copy_len, dtype=np.uint8)
        for trial in range(5):
            o = CorruptedOracle(bad)
            got = ldcstar_decode(o, p, np.random.default_rng(trial))
            assert np.array_equal(got, payload)
            assert o.queries_used <= p.max_queries


def test_ldcstar_all_copies_destroyed(rng):
    p = star()
    y = rng.integers(0, 2, p.n_star, dtype=np.uint8)
    with pytest.raises(DecodeFailure):
        ldcstar_decode(CorruptedOracle(y), p, rng)


def test_ldcstar_length_mismatch():
    with pytest.raises(InvalidInput):
        ldcstar_encode(np.zeros(10, np.uint8), star())


def test_ldcstar_random_flips_at_quarter_tolerance():
    # uniformly random flips of a p_delta/4 fraction of y_*
    p = star()
    p_delta = p.ecc.radius / p.ecc.A
    ok = 0
    for t in range(200):
        r = np.random.default_rng(t)
        payload = r.integers(0, 2, p.payload_len, dtype=np.uint8)
        bad = corrupt_hamming(ldcstar_encode(payload, p), p_delta / 4, "uniform_random", seed=t)
        o = CorruptedOracle(bad)
        try:
            ok += np.array_equal(ldcstar_decode(o, p, r), payload)
        except DecodeFailure:
            pass
        assert o.queries_used <= p.max_queries
    assert ok / 200 >= 0.99


# -- raLDC -------------------------------------------------------------------

P = RaldcParams(PaldcParams(k=4096))


@pytest.fixture(scope="module")
def encoded():
    r = np.random.default_rng(1)
    x = r.integers(0, 2, P.paldc.k, dtype=np.uint8)
    return x, raldc_enc(x, P, seed(42))


def test_raldc_clean_round_trip(encoded, rng):
    x, y = encoded
    assert y.size == P.m + P.star.n_star == P.n
    for _ in range(10):
        L = int(rng.integers(1, P.paldc.k + 1))
        R = int(rng.integers(L, P.paldc.k + 1))
        assert np.array_equal(raldc_dec(CorruptedOracle(y), L, R, P, rng), x[L - 1 : R])


def test_y_p_alone_decodes_with_the_true_key(encoded):
    x, y = encoded
    sk = paldc_gen(P.paldc, seed(42))
    out = paldc_dec(sk, CorruptedOracle(y[: P.m]), 100, 900, P.paldc)
    assert np.array_equal(out, x[99:900])


def test_destroyed_puzzle_region_fails(encoded, rng):
    _, y = encoded
    bad = y.copy()
    bad[P.m :] = rng.integers(0, 2, P.star.n_star, dtype=np.uint8)
    with pytest.raises(DecodeFailure):
        raldc_dec(CorruptedOracle(bad), 1, 10, P, rng)


def test_region_logs_are_separate_and_t_consecutive(encoded, rng):
    _, y = encoded
    trace = {}
    o = CorruptedOracle(y)
    raldc_dec(o, 300, 1700, P, rng, trace)
    yp, ys = trace["yp_log"], trace["ystar_log"]
    assert is_t_consecutive(yp, P.paldc.t)
    assert o.queries_used == yp.total + ys.total
    ref = CorruptedOracle(y[: P.m])
    paldc_dec(paldc_gen(P.paldc, seed(42)), ref, 300, 1700, P.paldc)
    assert yp.ranges == ref.log.ranges


def test_raldc_random_flips_at_quarter_tolerance():
    p_delta = P.paldc.ecc.radius / P.paldc.A
    ok = 0
    for t in range(200):
        r = np.random.default_rng(t)
        x = r.integers(0, 2, P.paldc.k, dtype=np.uint8)
        bad = corrupt_hamming(raldc_enc(x, P, seed(t)), p_delta / 4, "uniform_random", seed=t)
        L = int(r.integers(1, P.paldc.k - 511))
        try:
            ok += np.array_equal(raldc_dec(CorruptedOracle(bad), L, L + 511, P, r), x[L - 1 : L + 511])
        except DecodeFailure:
            pass
    assert ok / 200 >= 0.99
