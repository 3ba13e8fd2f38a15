import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dynspectra.geometry import affine_model, classical_model
from dynspectra.potential import (ClassicalPotential, CylinderWindow, PotentialError, TablePotential,
                                  lagrange_value_eventually_periodic, markov_value_periodic, window_bounds)
from dynspectra.sft import JunctionError, PeriodicPoint, TransitionSet

TOL = Fraction(1, 10**15)


@pytest.mark.parametrize("period,m", [((0,), 1), ((1,), 2), ((0, 0, 1, 1), 5), ((0, 0, 0, 0, 1, 1), 13)])
def test_markov_values_of_markov_periods(period, m):
    model = classical_model(2)
    e = markov_value_periodic(PeriodicPoint(period), ClassicalPotential(), model, TOL)
    truth = math.sqrt(9 * m * m - 4) / m
    assert e.width <= TOL
    assert abs(float(e.lo) - truth) < 1e-14


def test_lagrange_value_ignores_preperiod():
    model = classical_model(3)
    p = ClassicalPotential()
    a = lagrange_value_eventually_periodic((2, 2, 0), (1,), p, model, TOL)
    assert abs(float(a.lo) - math.sqrt(8)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=9), st.data())
def test_window_bounds_shrink_with_longer_window(w, data):
    model = classical_model(3)
    p = ClassicalPotential()
    w = tuple(w)
    c = data.draw(st.integers(1, len(w) - 2))
    outer = window_bounds(CylinderWindow(w, c), p, model)
    inner = window_bounds(CylinderWindow(w[1:-1], c - 1), p, model)
    assert inner.lo <= outer.lo and outer.hi <= inner.hi


def test_inadmissible_window_raises():
    model = affine_model([(Fraction(1, 3), 0), (Fraction(1, 3), Fraction(2, 3))],
                         T=TransitionSet.from_pairs(2, [(0, 0), (0, 1), (1, 0)]))
    p = TablePotential(1, {w: 0 for w in itertools.product((0, 1), repeat=3)})
    with pytest.raises(JunctionError):
        window_bounds(CylinderWindow((0, 1, 1), 1), p, model)


def test_table_potential_exact_and_completion_hull():
    model = affine_model([(Fraction(1, 3), 0), (Fraction(1, 3), Fraction(2, 3))])
    vals = {w: Fraction(sum(w)) for w in itertools.product((0, 1), repeat=3)}
    p = TablePotential(1, vals)
    p.validate(model.T)
    assert p.bounds((1, 0, 1), 1, model).lo == 2
    e = p.bounds((0, 1), 0, model)
    assert (e.lo, e.hi) == (1, 2)


def test_table_potential_rejects_bad_parameters():
    with pytest.raises(PotentialError):
        TablePotential(1, {}, kappa=-1)
    with pytest.raises(PotentialError):
        TablePotential(1, {}, rho=1)
    with pytest.raises(PotentialError):
        TablePotential(1, {(0, 0, 0): 1}).validate(TransitionSet.full(2))
