import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dynspectra.sft import (BlockAlphabet, GlueError, JunctionError, PeriodicPoint, TransitionError, TransitionSet,
                            build_block_alphabet, concat, enumerate_admissible, is_admissible, transpose)


def golden_mean():
    # no 11
    return TransitionSet.from_pairs(2, [(0, 0), (0, 1), (1, 0)])


def test_full_shift_successors_and_mixing():
    T = TransitionSet.full(3)
    assert T.successors(1) == (0, 1, 2)
    assert T.is_mixing() and T.is_symmetric()
    T.validate(mixing=True)


def test_golden_mean_admissibility():
    T = golden_mean()
    assert is_admissible((0, 1, 0, 0, 1), T)
    assert not is_admissible((0, 1, 1), T)
    with pytest.raises(JunctionError) as ei:
        concat((0, 1), (1, 0), T)
    assert ei.value.pair == (1, 1)


def test_dead_letter_rejected():
    T = TransitionSet.from_pairs(3, [(0, 0), (0, 1), (1, 0)])
    with pytest.raises(TransitionError):
        T.validate()


def test_non_mixing_flagged():
    T = TransitionSet.from_pairs(2, [(0, 1), (1, 0)])
    assert not T.is_mixing()
    with pytest.raises(TransitionError):
        T.validate(mixing=True)


def test_enumerate_counts_golden_mean_fibonacci():
    T = golden_mean()
    for n in range(1, 10):
        words = list(enumerate_admissible(T, lambda w: len(w) == n, lambda w: len(w) < n))
        brute = [w for w in itertools.product((0, 1), repeat=n) if is_admissible(w, T)]
        assert words == sorted(brute)


def test_periodic_point_closing_junction():
    T = golden_mean()
    PeriodicPoint((0, 1)).check(T)
    with pytest.raises(JunctionError):
        PeriodicPoint((1, 0, 1)).check(T)
    assert PeriodicPoint((0, 1, 2), 1).rotated() == (1, 2, 0)


def test_block_alphabet_glue_errors_list_pairs():
    T = golden_mean()
    with pytest.raises(GlueError) as ei:
        build_block_alphabet([(0, 1), (1, 0)], T)
    assert ((0, 1), (1, 0)) in ei.value.bad_pairs
    B = build_block_alphabet([(0,), (0, 1, 0)], T)
    assert isinstance(B, BlockAlphabet) and B.max_len == 3 and B.min_len == 1
    assert B.word([1, 0, 1]) == (0, 1, 0, 0, 0, 1, 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=12))
def test_transpose_admissible_in_reversed_shift(w):
    T = TransitionSet.from_pairs(3, [(0, 0), (0, 1), (1, 2), (2, 0), (2, 2)])
    assert is_admissible(w, T) == is_admissible(transpose(w), T.reversed())
    assert transpose(transpose(w)) == tuple(w)
