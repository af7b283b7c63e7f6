import numpy as np
from hypothesis import given, settings, strategies as st

from aldc.editdistance import banded_indel_distance, indel_distance, indel_distance_dp

short = st.lists(st.integers(0, 1), max_size=40)


@given(short, short)
def test_bitparallel_matches_dp(a, b):
    assert indel_distance(a, b) == indel_distance_dp(a, b)


@given(short, short, st.integers(0, 12))
def test_banded_exact_within_band(a, b, band):
    d = indel_distance_dp(a, b)
    got = banded_indel_distance(a, b, band)
    assert got == (d if d <= band else band + 1)


@settings(max_examples=200)
@given(short, st.integers(0, 6), st.integers(0, 6), st.integers(0, 8))
def test_zeros_around_b_are_free(a, lead, trail, band):
    # zeros padded around b are free; other differences still count
    b = [0] * lead + a + [0] * trail
    assert banded_indel_distance(a, b, band, free_end_zeros=True) <= min(band + 1, indel_distance(a, b))
    assert banded_indel_distance(a, b, max(band, lead + trail), free_end_zeros=True) == 0


def test_long_strings(rng):
    a = rng.integers(0, 2, 3000)
    b = a.copy()
    b = np.delete(b, [5, 900, 2000])
    b = np.insert(b, 100, 1)
    assert indel_distance(a, b) <= 4
    assert indel_distance(a, b) == banded_indel_distance(a, b, 10)
