"""The function f on the shift, evaluated on cylinder windows.

Classical case: f(theta) = a_0 + [0; a_1, a_2, ...] + [0; a_-1, a_-2, ...].
Table case: a locally constant value per (2w+1)-word, with an optional
variation modulus kappa * rho^m once both arms have length m >= w.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .enclosure import Enclosure
from .geometry import CantorModel, cf_matrix, mob_image
from .sft import JunctionError, PeriodicPoint, TransitionSet, is_admissible


class PotentialError(ValueError):
    pass


@dataclass(frozen=True)
class CylinderWindow:
    word: tuple
    center: int

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))
        if not 0 <= self.center < len(self.word):
            raise ValueError("window center out of range")

    @property
    def left_arm(self) -> int:
        return self.center

    @property
    def right_arm(self) -> int:
        return len(self.word) - self.center - 1


@dataclass(frozen=True)
class Tails:
    """Enclosures of the continued-fraction tails beyond each arm.

    left/right are (lo, hi) Fractions for x = [0; next digits ...]. Used by
    extraction to say the continuation lies in a restricted set.
    """

    left: tuple
    right: tuple


def digit_tail(digits: Sequence[int]) -> tuple:
    """Range of [0; a, ...] when a is drawn from digits and later digits are free in [1, inf)."""
    return Fraction(1, max(digits) + 1), Fraction(1, min(digits))


class ClassicalPotential:
    kind = "classical"

    def hash_payload(self) -> dict:
        return {"kind": "classical"}

    def _arm_tail(self, model: CantorModel, last: Optional[int], forward: bool) -> tuple:
        T = model.T
        if last is None:
            nxt = list(T.letters)
        else:
            nxt = T.successors(last) if forward else T.predecessors(last)
        return digit_tail([model.digit(a) for a in nxt])

    def arm_range(self, arm: tuple, tail: tuple) -> tuple:
        """Range of [0; arm..., x] for x in tail (arm holds letters)."""
        return mob_image(cf_matrix(arm), tail[0], tail[1])

    def bounds(self, word: tuple, center: int, model: CantorModel, tails: Optional[Tails] = None) -> Enclosure:
        a0 = model.digit(word[center])
        right = word[center + 1:]
        left = tuple(reversed(word[:center]))
        if tails is None:
            rt = self._arm_tail(model, word[-1], True)
            lt = self._arm_tail(model, word[0], False)
        else:
            rt, lt = tails.right, tails.left
        rlo, rhi = self.arm_range(right, rt)
        llo, lhi = self.arm_range(left, lt)
        return Enclosure(a0 + rlo + llo, a0 + rhi + lhi)

    def max_value_bound(self, model: CantorModel) -> Fraction:
        return Fraction(model.digit_cap + 2)


@dataclass
class TablePotential:
    """Locally constant potential with a variation modulus.

    values maps every admissible (2*radius+1)-word to a rational. On a
    window whose arms both have length m >= radius, f lies within
    kappa * rho^m of the table value of the central word.
    """

    radius: int
    values: dict
    kappa: Fraction = Fraction(0)
    rho: Fraction = Fraction(1, 2)
    kind: str = field(default="table", init=False)

    def __post_init__(self):
        self.values = {tuple(k): Fraction(v) for k, v in self.values.items()}
        self.kappa, self.rho = Fraction(self.kappa), Fraction(self.rho)
        if self.radius < 0:
            raise PotentialError("radius must be >= 0")
        if self.kappa < 0:
            raise PotentialError("kappa must be >= 0")
        if not 0 < self.rho < 1:
            raise PotentialError("rho must lie in (0, 1)")
        self._hull_cache = {}
        self._bounds_cache = {}

    def hash_payload(self) -> dict:
        return {
            "kind": "table",
            "radius": self.radius,
            "values": {",".join(map(str, k)): f"{v.numerator}/{v.denominator}" for k, v in sorted(self.values.items())},
            "kappa": f"{self.kappa.numerator}/{self.kappa.denominator}",
            "rho": f"{self.rho.numerator}/{self.rho.denominator}",
        }

    def validate(self, T: TransitionSet) -> None:
        n = 2 * self.radius + 1
        missing = [w for w in itertools.product(range(T.size), repeat=n)
                   if is_admissible(w, T) and w not in self.values]
        if missing:
            raise PotentialError(f"table incomplete: missing {len(missing)} admissible words, e.g. {missing[:3]}")
        extra = [w for w in self.values if len(w) != n]
        if extra:
            raise PotentialError(f"table words of wrong length: {extra[:3]}")

    def max_value_bound(self, model=None) -> Fraction:
        return max(self.values.values()) + self.kappa

    def _completion_hull(self, core: tuple, lpad: int, rpad: int, T: TransitionSet) -> tuple:
        key = (core, lpad, rpad)
        hit = self._hull_cache.get(key)
        if hit is not None:
            return hit
        lo = hi = None
        for left in _extensions(core[0], lpad, T, backward=True):
            for right in _extensions(core[-1], rpad, T, backward=False):
                v = self.values[left + core + right]
                lo = v if lo is None or v < lo else lo
                hi = v if hi is None or v > hi else hi
        if lo is None:
            raise PotentialError(f"no admissible completion of {core}")
        self._hull_cache[key] = (lo, hi)
        return lo, hi

    def bounds(self, word: tuple, center: int, model: CantorModel, tails=None) -> Enclosure:
        w = self.radius
        la, ra = center, len(word) - center - 1
        m = min(la, ra)
        core = word[max(0, center - w): center + w + 1]
        # the enclosure depends only on the core, the missing arm lengths and m
        key = (core, max(0, w - la), max(0, w - ra), m if self.kappa and m >= w else -1)
        hit = self._bounds_cache.get(key)
        if hit is not None:
            return hit
        if m >= w:
            v = self.values[core]
            err = self.kappa * self.rho**m
            e = Enclosure(v - err, v + err)
        else:
            lo, hi = self._completion_hull(core, key[1], key[2], model.T)
            err = self.kappa * self.rho**w
            e = Enclosure(lo - err, hi + err)
        self._bounds_cache[key] = e
        return e


def _extensions(letter: int, n: int, T: TransitionSet, backward: bool):
    """All admissible words of length n attachable before/after letter."""
    if n == 0:
        yield ()
        return
    step = T.predecessors if backward else T.successors
    for b in step(letter):
        for rest in _extensions(b, n - 1, T, backward):
            yield (rest + (b,)) if backward else ((b,) + rest)


def window_bounds(win: CylinderWindow, p, model: CantorModel, tails=None) -> Enclosure:
    if not is_admissible(win.word, model.T):
        raise JunctionError(next((a, b) for a, b in zip(win.word, win.word[1:]) if not model.T.allows(a, b)))
    return p.bounds(win.word, win.center, model, tails)


def periodic_window(period: tuple, phase: int, arm: int) -> tuple:
    """Window of the periodic point with the given phase at the center and arms of length arm."""
    n = len(period)
    word = tuple(period[(phase + i) % n] for i in range(-arm, arm + 1))
    return word, arm


def periodic_values(period: tuple, p, model: CantorModel, tol: Fraction, arm0: int | None = None) -> list:
    """Per-phase enclosures of f along the periodic orbit, each of width <= tol."""
    tol = Fraction(tol)
    n = len(period)
    arm = arm0 if arm0 is not None else max(2 * n, 8)
    out = [None] * n
    todo = list(range(n))
    while todo:
        rest = []
        for i in todo:
            word, c = periodic_window(period, i, arm)
            e = p.bounds(word, c, model)
            if e.width <= tol:
                out[i] = e
            else:
                rest.append(i)
        todo = rest
        arm *= 2
        if arm > 1 << 16:
            raise PotentialError("window enclosure does not shrink below tol; check kappa/rho")
    return out


def markov_value_periodic(pp: PeriodicPoint, p, model: CantorModel, tol) -> Enclosure:
    pp.check(model.T)
    vals = periodic_values(pp.period_word, p, model, Fraction(tol))
    return Enclosure(max(e.lo for e in vals), max(e.hi for e in vals))


def lagrange_value_eventually_periodic(preperiod: Sequence[int], period: Sequence[int], p, model: CantorModel,
                                       tol) -> Enclosure:
    preperiod, period = tuple(preperiod), tuple(period)
    if not period:
        raise ValueError("period must be nonempty")
    full = preperiod + period + period
    if not is_admissible(full, model.T):
        raise JunctionError(next((a, b) for a, b in zip(full, full[1:]) if not model.T.allows(a, b)))
    # the limsup only sees the periodic tail
    return markov_value_periodic(PeriodicPoint(period), p, model, tol)
