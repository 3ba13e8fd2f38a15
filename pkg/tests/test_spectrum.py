import math
from fractions import Fraction

from dynspectra.geometry import classical_model
from dynspectra.potential import ClassicalPotential
from dynspectra.spectrum import (DIES, SURVIVES, check_submultiplicative, count_sublevel, estimate_dimension,
                                 lyndon_words, spectrum_slice, survives)

P = ClassicalPotential()


def test_survives_anchors():
    m = classical_model(2)
    assert survives((1, 1), Fraction(3), 12, P, m).status == SURVIVES
    assert survives((0, 1), Fraction(23, 10), 12, P, m).status == DIES
    # (2)^inf has value 2 sqrt 2 < 2.9, so a run of 2s survives
    assert survives((1, 1, 1, 1, 1), Fraction(29, 10), 12, P, m).status == SURVIVES


def test_minimum_of_spectrum_all_die():
    m = classical_model(3)
    for r in range(1, 8):
        rec = count_sublevel(Fraction(22, 10), r, 12, P, m)
        assert (rec.lower_count, rec.upper_count) == (0, 0)


def test_counts_monotone_in_t():
    m = classical_model(3)
    prev = None
    for t in (Fraction(3), Fraction(32, 10), Fraction(35, 10)):
        rec = count_sublevel(t, 6, 16, P, m)
        assert rec.lower_count <= rec.upper_count <= rec.family_size
        if prev is not None:
            assert rec.lower_count >= prev.lower_count
        prev = rec


def test_threads_do_not_change_counts():
    m = classical_model(3)
    a = count_sublevel(Fraction(33, 10), 7, 14, P, m, threads=1)
    b = count_sublevel(Fraction(33, 10), 7, 14, P, m, threads=3)
    assert a == b


def test_submultiplicative_small():
    m = classical_model(2)
    ok, (nmn, nm, nn) = check_submultiplicative(Fraction(7, 2), 3, 4, 1, 16, P, m)
    assert ok and nmn <= 2 * nm * nn


def test_estimate_dimension_zero_below_minimum():
    est = estimate_dimension(Fraction(2), 8, 12, 0, P, classical_model(3))
    assert est.upper_bound == 0


def test_lyndon_word_counts():
    # binary Lyndon words by length: 2, 1, 2, 3, 6, 9
    assert [sum(1 for w in lyndon_words(2, 6) if len(w) == n) for n in range(1, 7)] == [2, 1, 2, 3, 6, 9]


def test_slice_period4_markov_values():
    vals = spectrum_slice(Fraction(3), 4, P, classical_model(2), Fraction(1, 10**12))
    assert len(vals) == 3
    for (e, _), mk in zip(vals, (1, 2, 5)):
        assert abs(float(e.lo) - math.sqrt(9 * mk * mk - 4) / mk) < 1e-12
