import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dynspectra.enclosure import (Enclosure, ScaleAmbiguityError, dec_down, dec_up, exp_enclosure, floor_log_inverse,
                                  log_enclosure, round_down, round_up)

fracs = st.fractions(min_value=-100, max_value=100, max_denominator=1000)


@settings(max_examples=100, deadline=None)
@given(fracs, fracs, fracs, fracs)
def test_arithmetic_contains_point_results(a, b, c, d):
    x = Enclosure(min(a, b), max(a, b))
    y = Enclosure(min(c, d), max(c, d))
    for u in (x.lo, x.hi, x.mid):
        for v in (y.lo, y.hi, y.mid):
            assert (x + y).contains(u + v)
            assert (x - y).contains(u - v)
            assert (x * y).contains(u * v)


@settings(max_examples=100, deadline=None)
@given(fracs)
def test_outward_rounding(x):
    assert round_down(x) <= x <= round_up(x)
    assert Fraction(dec_down(x)) <= x <= Fraction(dec_up(x))
    assert round_up(x) - round_down(x) <= Fraction(1, 10**12)


def test_json_round_trip():
    e = Enclosure(Fraction(2, 7), Fraction(1, 3))
    assert Enclosure.from_json(e.to_json()) == e
    assert e.to_json() == {"lo": "2/7", "hi": "1/3"}


def test_exp_log_enclosures_contain_truth():
    for x in (Fraction(1, 3), Fraction(5), Fraction(-7, 2)):
        e = exp_enclosure(x)
        assert e.lo <= Fraction(math.exp(x)) * (1 + Fraction(1, 10**12)) and e.hi >= Fraction(math.exp(x)) * (
            1 - Fraction(1, 10**12))
        assert e.width < Fraction(1, 10**25) * max(1, e.hi)
    l2 = log_enclosure(Fraction(2))
    assert l2.lo < Fraction(math.log(2)) * (1 + Fraction(1, 10**14)) and l2.width < Fraction(1, 10**25)


def test_floor_log_inverse():
    assert floor_log_inverse(Fraction(1, 228)) == 5
    assert floor_log_inverse(Fraction(1, 4**5)) == 6
    assert floor_log_inverse(Fraction(1)) == 0
    assert floor_log_inverse(Fraction(2, 15)) == 2


def test_floor_log_inverse_rejects_nonpositive():
    with pytest.raises((ValueError, ScaleAmbiguityError)):
        floor_log_inverse(Fraction(0))
