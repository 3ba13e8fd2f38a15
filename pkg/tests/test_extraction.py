from fractions import Fraction

import pytest

from dynspectra.extraction import (ExtractionParams, NotBelowThresholdError, certify_delta, extract_subshift,
                                   m0_constant)
from dynspectra.geometry import affine_model, classical_model
from dynspectra.potential import ClassicalPotential
from dynspectra.sft import build_block_alphabet

P = ClassicalPotential()


def test_certify_single_block():
    m = classical_model(2)
    B = build_block_alphabet([(0,)], m.T)
    delta, sup = certify_delta(B, Fraction(23, 10), 3, P, m)
    assert abs(float(delta) - 0.063932) < 1e-6
    assert sup.lo <= sup.hi < Fraction(23, 10)


def test_certify_markov_period_block():
    m = classical_model(2)
    B = build_block_alphabet([(1, 1, 0, 0)], m.T)
    delta, sup = certify_delta(B, Fraction(3), 12, P, m)
    assert abs(float(sup.hi) - 2.973213749) < 1e-6


def test_certify_reports_violators():
    m = classical_model(2)
    B = build_block_alphabet([(0,), (1,)], m.T)
    with pytest.raises(NotBelowThresholdError) as ei:
        certify_delta(B, Fraction(28, 10), 3, P, m)
    assert (1,) in ei.value.words and (0, 1) in ei.value.words


def test_compiled_scan_agrees_with_exact_scan():
    m = classical_model(3)
    B = build_block_alphabet([(0, 1), (1, 0), (1, 1), (0, 0, 1)], m.T)
    t = Fraction(4)
    s_exact, s_fast = {}, {}
    d1, sup1 = certify_delta(B, t, 9, P, m, stats=s_exact)
    d2, sup2 = certify_delta(B, t, 9, P, m, record_cap=0, stats=s_fast)
    assert s_exact["mode"] != s_fast["mode"]
    assert s_exact["count"] == s_fast["count"]
    assert abs(sup1.hi - sup2.hi) < Fraction(1, 10**9)
    assert sup2.hi >= sup1.hi - Fraction(1, 10**12)


def test_m0_frozen():
    assert m0_constant(classical_model(2), 6) == 21
    assert m0_constant(classical_model(3), 6) == 36
    assert m0_constant(affine_model([(Fraction(1, 4), 0), (Fraction(1, 4), Fraction(3, 4))]), 6) == 6


def test_extraction_small_certificate():
    m = classical_model(3)
    cert = extract_subshift(ExtractionParams(t=Fraction(347, 100), eta=Fraction(1, 2), r0=4), P, m)
    assert cert.delta > 0 and cert.sup_bound.hi < Fraction(347, 100)
    assert Fraction(45, 100) < cert.dim_lower < 1
    js = cert.to_json()
    assert js["delta"] == f"{cert.delta.numerator}/{cert.delta.denominator}"
