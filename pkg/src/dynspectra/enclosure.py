"""Closed rational intervals and a few certified transcendental helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

# extra decimal digits kept when mpmath values are turned into rationals
_GUARD = 10


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class Enclosure:
    """[lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = to_fraction(self.lo), to_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty enclosure [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "Enclosure":
        x = to_fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lo <= x.lo and x.hi <= self.hi
        x = to_fraction(x)
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(min(self.lo, other.lo), max(self.hi, other.hi))

    def inflate(self, r) -> "Enclosure":
        r = to_fraction(r)
        return Enclosure(self.lo - r, self.hi + r)

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        other = to_fraction(other)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo - other.hi, self.hi - other.lo)
        other = to_fraction(other)
        return Enclosure(self.lo - other, self.hi - other)

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __mul__(self, other):
        if not isinstance(other, Enclosure):
            other = Enclosure.point(other)
        ps = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Enclosure(min(ps), max(ps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Enclosure):
            other = Enclosure.point(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor enclosure contains 0")
        return self * Enclosure(1 / other.hi, 1 / other.lo)

    def __float__(self):
        return float(self.mid)

    def to_json(self) -> dict:
        return {"lo": frac_str(self.lo), "hi": frac_str(self.hi)}

    @classmethod
    def from_json(cls, d) -> "Enclosure":
        return cls(to_fraction(d["lo"]), to_fraction(d["hi"]))

    def __repr__(self):
        return f"Enclosure([{float(self.lo):.12g}, {float(self.hi):.12g}])"


def hull_all(encs) -> Enclosure:
    encs = list(encs)
    return Enclosure(min(e.lo for e in encs), max(e.hi for e in encs))


def frac_str(x: Fraction) -> str:
    x = to_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def round_down(x: Fraction, digits: int = 12) -> Fraction:
    s = 10**digits
    return Fraction(math.floor(x * s), s)


def round_up(x: Fraction, digits: int = 12) -> Fraction:
    s = 10**digits
    return Fraction(math.ceil(x * s), s)


def dec_down(x: Fraction, digits: int = 12) -> str:
    return _dec(round_down(to_fraction(x), digits), digits)


def dec_up(x: Fraction, digits: int = 12) -> str:
    return _dec(round_up(to_fraction(x), digits), digits)


def _dec(x: Fraction, digits: int) -> str:
    n = x.numerator * 10**digits // x.denominator  # exact since x is on the grid
    sign = "-" if n < 0 else ""
    n = abs(n)
    ip, fp = divmod(n, 10**digits)
    return f"{sign}{ip}.{fp:0{digits}d}"


def mpf_to_fraction(v) -> Fraction:
    v = mpmath.mpf(v)
    if v == 0:
        return Fraction(0)
    man, exp = v.man_exp
    return Fraction(int(man)) * Fraction(2) ** int(exp)


def _mp_enclose(fn, x: Fraction, dps: int) -> Enclosure:
    # mpmath evaluates elementary functions to within a few ulps at the
    # working precision; widening by 10^-(dps-_GUARD) relative covers that.
    with mpmath.workdps(dps):
        v = fn(mpmath.mpf(x.numerator) / x.denominator)
        mid = mpf_to_fraction(v)
    pad = (abs(mid) + 1) * Fraction(1, 10 ** (dps - _GUARD))
    return Enclosure(mid - pad, mid + pad)


def exp_enclosure(x, dps: int = 40) -> Enclosure:
    return _mp_enclose(mpmath.exp, to_fraction(x), dps)


def log_enclosure(x, dps: int = 40) -> Enclosure:
    x = to_fraction(x)
    if x <= 0:
        raise ValueError("log of a nonpositive number")
    if x == 1:
        return Enclosure.point(0)
    return _mp_enclose(mpmath.log, x, dps)


def floor_log_inverse(size: Fraction, max_refine: int = 6) -> int:
    """floor(-ln size) for a positive rational size, decided rigorously.

    Compares 1/size with enclosures of e^k; the precision is raised when
    an enclosure straddles 1/size.
    """
    size = to_fraction(size)
    if size <= 0:
        raise ValueError("size must be positive")
    inv = 1 / size
    if inv < 1:
        # scale is negative; only happens for degenerate data
        k = -1
        while True:
            if _exp_le(k, inv, max_refine):
                return k
            k -= 1
    bits = inv.numerator.bit_length() - inv.denominator.bit_length() - 1
    k = max(0, int(bits * math.log(2)) - 1)
    # advance while e^(k+1) <= inv
    while _exp_le(k + 1, inv, max_refine):
        k += 1
    while k > 0 and not _exp_le(k, inv, max_refine):
        k -= 1
    return k


class ScaleAmbiguityError(ArithmeticError):
    pass


def _exp_le(k: int, x: Fraction, max_refine: int) -> bool:
    """Decide e^k <= x."""
    if k == 0:
        return x >= 1
    dps = 40
    for _ in range(max_refine):
        e = exp_enclosure(k, dps)
        if e.hi <= x:
            return True
        if e.lo > x:
            return False
        dps *= 2
    raise ScaleAmbiguityError(f"cannot separate e^{k} from {x}")
