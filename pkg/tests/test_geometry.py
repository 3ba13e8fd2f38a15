import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dynspectra.geometry import (ContractionError, ModelError, affine_model, classical_model, continuants,
                                 cylinder_interval, cylinder_size, distortion_constant, scale_family, stable_scale,
                                 symmetry_constant, unstable_scale)
from dynspectra.sft import TransitionSet, transpose

digit_words = st.lists(st.integers(1, 5), min_size=1, max_size=9)


def test_continuant_anchor():
    assert continuants((2, 2, 1, 1))[1] == 12
    assert continuants(()) == (0, 1, 0)


@settings(max_examples=100, deadline=None)
@given(digit_words)
def test_continuant_reversal_symmetry(w):
    assert continuants(w)[1] == continuants(tuple(reversed(w)))[1]


@settings(max_examples=100, deadline=None)
@given(digit_words)
def test_continuant_matches_fraction_recursion(w):
    # [0; a1, ..., an] computed from the tail inward
    x = Fraction(0)
    for a in reversed(w):
        x = 1 / (a + x)
    p, q, _ = continuants(w)
    assert Fraction(p, q) == x


def test_cylinder_intervals_cap2():
    m = classical_model(3)
    assert (cylinder_interval((2,), m).lo, cylinder_interval((2,), m).hi) == (Fraction(1, 4), Fraction(1, 3))
    assert cylinder_interval((1, 0), m).lo == Fraction(1, 3) and cylinder_interval((1, 0), m).hi == Fraction(2, 5)
    assert (cylinder_interval((1,), m).lo, cylinder_interval((1,), m).hi) == (Fraction(1, 3), Fraction(1, 2))
    assert cylinder_interval((1, 1), m).lo == Fraction(2, 5) and cylinder_interval((1, 1), m).hi == Fraction(3, 7)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=8))
def test_cylinder_size_formula(w):
    m = classical_model(4)
    _, q, qp = continuants(w, m)
    assert cylinder_size(w, m).lo == Fraction(1, q * (q + qp))


def test_size_and_scale_anchor():
    m = classical_model(2)
    w = (1, 1, 0, 0)
    assert cylinder_size(w, m).lo == Fraction(1, 228)
    assert unstable_scale(w, m) == 5


def test_quarter_ratio_affine_scale_family():
    m = affine_model([(Fraction(1, 4), 0), (Fraction(1, 4), Fraction(3, 4))])
    fam = scale_family(3, m)
    assert len(fam.words) == 8 and all(len(w) == 3 for w in fam.words)
    assert unstable_scale((0,) * 5, m) == 6


def test_scale_family_is_prefix_code_cap2():
    m = classical_model(2)
    assert scale_family(1, m).words == [(0, 0), (0, 1), (1,)]
    for r in range(1, 7):
        words = scale_family(r, m).words
        ws = set(words)
        for w in words:
            assert unstable_scale(w, m) >= r and unstable_scale(w[:-1], m) < r if len(w) > 1 else True
            assert not any(w[:k] in ws for k in range(1, len(w)))
        # the cylinders tile the Cantor set: total length check against the root interval
        assert sum(cylinder_size(w, m).lo for w in words) <= 1


def test_stable_side_family_transposes():
    m = classical_model(3)
    fam = scale_family(4, m, side="s")
    for w in fam.words:
        assert stable_scale(w, m) >= 4


def test_distortion_and_symmetry_frozen():
    m = classical_model(2)
    c1 = distortion_constant(m, 6)
    assert abs(float(c1.hi) - math.log(1.5)) < 1e-9
    c2 = symmetry_constant(m, 6)
    assert abs(float(c2.hi) - 0.237328) < 1e-5


def test_non_contracting_model_rejected():
    with pytest.raises((ContractionError, ModelError)):
        affine_model([(Fraction(1), 0)])


def test_overlapping_images_rejected():
    with pytest.raises(ModelError):
        affine_model([(Fraction(1, 2), 0), (Fraction(1, 2), Fraction(1, 4))])


def test_rate_sandwich_classical():
    for N in (2, 3, 5):
        m = classical_model(N)
        rb = m.rates
        for w in scale_family(5, m).words:
            n = len(w)
            s = cylinder_size(w, m).lo
            assert m.c_lo * rb.l2u ** (-n) <= s <= m.c_hi * rb.l1u ** (-n)
