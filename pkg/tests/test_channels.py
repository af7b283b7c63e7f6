import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aldc.channels import (
    EditOp, EditScript, apply, bad_intervals_cover, classify_blocks, corrupt_hamming,
    corrupt_insdel, derive_block_map, bad_block_bounds, size_bounds,
)
from aldc.editdistance import indel_distance
from aldc.errors import InvalidInput
from aldc.insdel_compiler import CompilerParams, enc_compile

P16 = CompilerParams(m=32 * 16)
LAYOUT = (P16.blk_len, P16.block.buffer_len)


@pytest.fixture(scope="module")
def clean16():
    y = np.random.default_rng(7).integers(0, 2, P16.m).astype(np.uint8)
    return enc_compile(y, P16)


def test_hamming_zero_budget(rng):
    y = rng.integers(0, 2, 500).astype(np.uint8)
    for s in ("uniform_random", "prefix_burst", "block_targeting"):
        assert np.array_equal(corrupt_hamming(y, 0.0, s, 1), y)


def test_prefix_burst_flips_exact_prefix(rng):
    y = rng.integers(0, 2, 1000).astype(np.uint8)
    out = corrupt_hamming(y, 0.037, "prefix_burst", 1)
    diff = np.flatnonzero(out != y)
    assert diff.tolist() == list(range(37))


def test_hamming_budget_and_determinism(rng):
    y = rng.integers(0, 2, 4096).astype(np.uint8)
    for s in ("uniform_random", "prefix_burst", "block_targeting"):
        a = corrupt_hamming(y, 0.05, s, 3)
        assert (a != y).sum() <= int(0.05 * 4096)
        assert np.array_equal(a, corrupt_hamming(y, 0.05, s, 3))
    with pytest.raises(InvalidInput):
        corrupt_hamming(y, 0.1, "sideways", 0)


def test_uniform_flip_frequency():
    n, delta, trials = 64, 0.25, 10_000
    y = np.zeros(n, dtype=np.uint8)
    counts = np.zeros(n)
    for t in range(trials):
        counts += corrupt_hamming(y, delta, "uniform_random", t)
    freq = counts / trials
    sigma = np.sqrt(delta * (1 - delta) / trials)
    assert np.all(np.abs(freq - delta) <= 3.5 * sigma)  # 64 positions; 3.5 sigma keeps the family-wise rate low
    assert abs(freq.mean() - delta) <= 3 * sigma / np.sqrt(n)


def test_insdel_zero_budget(clean16):
    for s in ("uniform_indel", "burst_delete", "buffer_zeroing", "block_kill"):
        out, script = corrupt_insdel(clean16, 0.0, s, 1, layout=LAYOUT)
        assert np.array_equal(out, clean16) and script.ops == []


def test_burst_delete_single_run(clean16):
    out, script = corrupt_insdel(clean16, 0.01, "burst_delete", 4)
    run = int(2 * 0.01 * clean16.size)
    pos = [op.pos for op in script.ops]
    assert len(pos) == run and pos == list(range(pos[0], pos[0] + run))
    assert out.size == clean16.size - run


def test_layout_required():
    with pytest.raises(InvalidInput):
        corrupt_insdel(np.zeros(100, dtype=np.uint8), 0.1, "block_kill", 0)
    with pytest.raises(InvalidInput):
        corrupt_insdel(np.zeros(100, dtype=np.uint8), 0.1, "nope", 0)


def test_script_replay_and_budget(clean16):
    rng = np.random.default_rng(0)
    for t in range(1000):
        s = ("uniform_indel", "burst_delete", "buffer_zeroing", "block_kill")[t % 4]
        delta = float(rng.uniform(0, 0.05))
        out, script = corrupt_insdel(clean16, delta, s, t, layout=LAYOUT)
        assert script.cost() <= 2 * delta * clean16.size
        text = script.to_text()
        assert np.array_equal(apply(EditScript.from_text(text), clean16), out)
        if t % 50 == 0:
            assert indel_distance(clean16, out) <= script.cost()


def test_block_kill_removes_whole_blocks(clean16):
    out, script = corrupt_insdel(clean16, 0.1, "block_kill", 2, layout=LAYOUT)
    killed = {(op.pos - 1) // P16.blk_len for op in script.ops}
    assert len(script.ops) == len(killed) * P16.blk_len
    assert out.size == clean16.size - len(script.ops)


def test_script_text_format():
    s = EditScript([EditOp(3, "I", 1), EditOp(5, "D"), EditOp(7, "S", 0)])
    assert s.to_text() == "I 3 1\nD 5\nS 7 0\n"
    assert EditScript.from_text(s.to_text()) == s
    with pytest.raises(InvalidInput):
        EditScript.from_text("X 1\n")
    with pytest.raises(InvalidInput):
        EditScript.from_text("I 1 2\n")


def test_apply_semantics():
    clean = np.array([0, 1, 0, 1], dtype=np.uint8)
    s = EditScript([EditOp(1, "I", 1), EditOp(1, "D"), EditOp(3, "S", 1), EditOp(5, "I", 0)])
    assert apply(s, clean).tolist() == [1, 1, 1, 1, 0]
    with pytest.raises(InvalidInput):
        apply([EditOp(2, "D"), EditOp(2, "S", 0)], clean)
    with pytest.raises(InvalidInput):
        apply([EditOp(9, "D")], clean)


def test_block_map_identity():
    phi = derive_block_map(EditScript(), 4, 10)
    assert phi.tolist() == [(i - 1) // 10 + 1 for i in range(1, 41)]


def test_block_map_deleted_first_block():
    script = EditScript([EditOp(p, "D") for p in range(1, 11)])
    phi = derive_block_map(script, 4, 10)
    assert phi.size == 30 and phi[0] == 2 and 1 not in phi


def test_block_map_insertions_join_previous_block():
    script = EditScript([EditOp(1, "I", 1), EditOp(11, "I", 0), EditOp(11, "I", 1)])
    phi = derive_block_map(script, 2, 10)
    assert phi.tolist() == [1] * 11 + [1, 1] + [2] * 10


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 41), st.sampled_from("IDS"), st.integers(0, 1)), max_size=25))
def test_block_map_is_monotone_partition(raw):
    seen, ops = set(), []
    for pos, kind, bit in raw:
        if kind != "I":
            if pos > 40 or pos in seen:
                continue
            seen.add(pos)
        ops.append(EditOp(pos, kind, bit if kind != "D" else None))
    script = EditScript(ops)
    phi = derive_block_map(script, 4, 10)
    assert phi.size == apply(script, np.zeros(40, dtype=np.uint8)).size
    assert np.all(np.diff(phi) >= 0) and (phi.size == 0 or (phi.min() >= 1 and phi.max() <= 4))


def test_classify_clean(clean16):
    h = classify_blocks(clean16, clean16, derive_block_map(EditScript(), 16, P16.blk_len), P16)
    assert not h.costs.any() and h.good.all() and h.local_good.all()
    assert (h.sizes == P16.blk_len).all()


def _local_good_brute(costs, good, gamma_tau, theta):
    B = costs.size
    out = np.ones(B, dtype=bool)
    for a in range(B):
        for b in range(a, B):
            w = b - a + 1
            if costs[a : b + 1].sum() > gamma_tau * w or (~good[a : b + 1]).sum() > theta * w:
                out[a : b + 1] = False
    return out


def test_local_good_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(200):
        B = int(rng.integers(1, 20))
        costs = rng.integers(0, 6, B) * (rng.random(B) < 0.3)
        good = costs <= 3
        theta = float(rng.choice([0.05, 0.2, 0.5]))
        assert np.array_equal(~bad_intervals_cover(costs, good, 3.0, theta),
                              _local_good_brute(costs, good, 3.0, theta))


def test_single_killed_block_classification(clean16):
    # kill block 3 only; the budget is far below gamma*tau*B*theta
    script = EditScript([EditOp(p, "D") for p in range(2 * P16.blk_len + 1, 3 * P16.blk_len + 1)])
    bad = apply(script, clean16)
    h = classify_blocks(clean16, bad, derive_block_map(script, 16, P16.blk_len), P16)
    assert h.costs[2] == P16.blk_len and not h.good[2]
    assert h.good.sum() == 15
    assert np.array_equal(h.local_good, _local_good_brute(h.costs, h.good, P16.gamma * P16.tau, P16.theta))
    # with theta = 0.05 every interval around block 3 shorter than 20 blocks is bad, so all 16 are
    assert not h.local_good.any()


def test_bad_fraction_within_worst_case_bound(clean16):
    rng = np.random.default_rng(11)
    for t in range(100):
        delta = float(rng.uniform(0, 0.02))
        s = ("uniform_indel", "burst_delete", "buffer_zeroing", "block_kill")[t % 4]
        bad, script = corrupt_insdel(clean16, delta, s, t, layout=LAYOUT)
        h = classify_blocks(clean16, bad, derive_block_map(script, 16, P16.blk_len), P16)
        b1, b2 = bad_block_bounds(delta, P16)
        assert h.frac_bad <= b1 and h.frac_local_bad <= b2
        lo, hi = size_bounds(P16)
        assert np.all((h.sizes[h.good] >= lo) & (h.sizes[h.good] <= hi))


def test_pad_scaled_size_window_has_counterexample(clean16):
    # three deletions in one block keep it gamma-good but leave the narrower window
    script = EditScript([EditOp(p, "D") for p in (20, 40, 60)])
    bad = apply(script, clean16)
    h = classify_blocks(clean16, bad, derive_block_map(script, 16, P16.blk_len), P16)
    lo, _ = size_bounds(P16, pad_factor=True)
    assert h.good[0] and h.sizes[0] < lo
