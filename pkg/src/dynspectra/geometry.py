"""Cylinder geometry of the unstable and stable Cantor sets.

Every branch is a Moebius map x -> (a x + b) / (c x + d) on [0, 1], so a
cylinder I(w) = H_{w_1} o ... o H_{w_n}([0, 1]) has exact rational
endpoints. The continued-fraction model uses H_a(x) = 1 / (a + x), i.e.
the matrix [[0, 1], [1, a]], with letter i standing for digit i + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .enclosure import Enclosure, ScaleAmbiguityError, exp_enclosure, floor_log_inverse, log_enclosure
from .sft import TransitionSet, Word, enumerate_admissible, transpose


class ModelError(ValueError):
    pass


class ContractionError(ModelError):
    pass


Mobius = tuple  # (a, b, c, d)


def mob_mul(m: Mobius, n: Mobius) -> Mobius:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mob_eval(m: Mobius, x):
    a, b, c, d = m
    return Fraction(a * x + b) / (c * x + d)


def mob_image01(m: Mobius) -> tuple:
    """Image of [0, 1] as (lo, hi)."""
    a, b, c, d = m
    y0 = Fraction(b) / d
    y1 = Fraction(a + b) / (c + d)
    return (y0, y1) if y0 <= y1 else (y1, y0)


def mob_image(m: Mobius, lo, hi) -> tuple:
    y0, y1 = mob_eval(m, lo), mob_eval(m, hi)
    return (y0, y1) if y0 <= y1 else (y1, y0)


def mob_deriv_range(m: Mobius, lo=Fraction(0), hi=Fraction(1)) -> tuple:
    """min and max of |h'| on [lo, hi], assuming no pole there."""
    a, b, c, d = m
    det = abs(Fraction(a * d - b * c))
    v0, v1 = (c * lo + d) ** 2, (c * hi + d) ** 2
    # (cx + d)^2 is monotone on an interval free of its zero
    return det / max(v0, v1), det / min(v0, v1)


@dataclass(frozen=True)
class RateBounds:
    """Expansion bounds 1 < l1 <= l2 for both sides.

    Unstable cylinders of length n have size in [C_lo l2u^-n, C_hi l1u^-n];
    the stable side is stored the same way (expansion of the inverse map).
    """

    l1u: Fraction
    l2u: Fraction
    l1s: Fraction
    l2s: Fraction

    def __post_init__(self):
        for k in ("l1u", "l2u", "l1s", "l2s"):
            object.__setattr__(self, k, Fraction(getattr(self, k)))
        if not (1 < self.l1u <= self.l2u and 1 < self.l1s <= self.l2s):
            raise ModelError("rate bounds must satisfy 1 < l1 <= l2 on both sides")


@dataclass(frozen=True)
class Branch:
    coeffs: Mobius
    orientation: int


@dataclass(frozen=True)
class CantorModel:
    """Symbolic model plus interval geometry.

    kind is "cf" (continued fractions with digits 1..digit_cap) or
    "branches" (one Moebius/affine contraction per letter, optionally
    overridden per transition).
    """

    T: TransitionSet
    kind: str
    rates: RateBounds
    digit_cap: int = 0
    branches: tuple = ()
    pair_branches: tuple = ()  # ((a, b), Branch) overrides for letter a followed by b
    stable_branches: tuple = ()
    c_lo: Fraction = Fraction(1)
    c_hi: Fraction = Fraction(1)
    mixing: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "pair_branches", tuple(sorted(dict(self.pair_branches).items())))
        object.__setattr__(self, "_pairs", dict(self.pair_branches))
        # the model keys several lru caches; hashing all fields each time is slow
        object.__setattr__(self, "_hash", hash((self.T, self.kind, self.rates, self.digit_cap, self.branches,
                                                self.pair_branches, self.stable_branches, self.c_lo, self.c_hi,
                                                self.mixing, self.name)))

    def __hash__(self):
        return self._hash

    @property
    def size(self) -> int:
        return self.T.size

    @property
    def is_cf(self) -> bool:
        return self.kind == "cf"

    def digit(self, letter: int) -> int:
        return letter + 1

    # -- matrices ---------------------------------------------------------

    def matrix(self, w: Sequence[int], stable: bool = False) -> Mobius:
        if self.kind == "cf":
            return cf_matrix(tuple(w))
        w = tuple(w)
        if not w:
            return (1, 0, 0, 1)
        use_stable = bool(stable and self.stable_branches)
        br = self.stable_branches if use_stable else self.branches
        return mob_mul(_head_matrix(self, w, use_stable), br[w[-1]].coeffs)

    def interval(self, w: Sequence[int]) -> tuple:
        return _interval(self, tuple(w), False)

    def size_of(self, w: Sequence[int]) -> Fraction:
        lo, hi = _interval(self, tuple(w), False)
        return hi - lo

    def stable_size_of(self, w: Sequence[int]) -> Fraction:
        """Size of w in the stable geometry (w given in stable reading order)."""
        lo, hi = _interval(self, tuple(w), True)
        return hi - lo

    def size_constants(self) -> tuple:
        return self.c_lo, self.c_hi

    def validate(self) -> None:
        self.T.validate(mixing=self.mixing)
        if self.kind == "cf":
            if self.digit_cap != self.size:
                raise ModelError("cf alphabet size must equal digit_cap")
            return
        if self.kind != "branches":
            raise ModelError(f"unknown geometry kind {self.kind!r}")
        if len(self.branches) != self.size:
            raise ModelError("need exactly one branch per letter")
        for label, brs, rl, rh in (("branches", self.branches, self.rates.l1u, self.rates.l2u),
                                   ("stable_branches", self.stable_branches, self.rates.l1s, self.rates.l2s)):
            if label == "stable_branches" and not brs:
                continue
            if len(brs) != self.size:
                raise ModelError(f"{label}: need exactly one branch per letter")
            _check_branch_set(label, list(enumerate(brs)), rl, rh)
        for (a, b), br in self.pair_branches:
            if (a, b) not in self.T.allowed:
                raise ModelError(f"pair branch {(a, b)} is not an allowed transition")
            _check_branch(f"pair_branches[{a},{b}]", br, self.rates.l1u, self.rates.l2u)
            # the overriding map must keep I(ab) inside I(a)
            lo, hi = mob_image01(mob_mul(br.coeffs, self.branches[b].coeffs))
            alo, ahi = mob_image01(self.branches[a].coeffs)
            if lo < alo or hi > ahi:
                raise ModelError(f"pair_branches[{a},{b}]: cylinder ({a},{b}) escapes cylinder ({a})")


def _check_branch(label, br: Branch, l1, l2):
    a, b, c, d = br.coeffs
    if d == 0 or c + d == 0 or (d > 0) != (c + d > 0):
        raise ContractionError(f"{label}: pole on [0, 1]")
    det = a * d - b * c
    if det == 0:
        raise ContractionError(f"{label}: degenerate map")
    if (1 if det > 0 else -1) != br.orientation:
        raise ModelError(f"{label}: orientation {br.orientation} disagrees with sign of ad-bc")
    dmin, dmax = mob_deriv_range(br.coeffs)
    if dmax >= 1:
        raise ContractionError(f"{label}: derivative reaches {dmax} >= 1, not a contraction")
    lo, hi = mob_image01(br.coeffs)
    if lo < 0 or hi > 1:
        raise ModelError(f"{label}: image leaves [0, 1]")
    if dmin < 1 / l2 or dmax > 1 / l1:
        raise ModelError(f"{label}: derivative range [{dmin}, {dmax}] inconsistent with rate bounds")


def _check_branch_set(label, items, l1, l2):
    for i, br in items:
        _check_branch(f"{label}[{i}]", br, l1, l2)
    ims = sorted(mob_image01(br.coeffs) for _, br in items)
    for (lo1, hi1), (lo2, hi2) in zip(ims, ims[1:]):
        if lo2 < hi1:
            raise ModelError(f"{label}: branch images overlap")


@lru_cache(maxsize=1 << 20)
def cf_matrix(w: tuple) -> Mobius:
    if not w:
        return (1, 0, 0, 1)
    a, b, c, d = cf_matrix(w[:-1])
    n = w[-1] + 1
    # right-multiply by [[0, 1], [1, n]]
    return (b, a + b * n, d, c + d * n)


@lru_cache(maxsize=1 << 20)
def _head_matrix(model: CantorModel, w: tuple, stable: bool) -> Mobius:
    """Product of the branch maps of every letter of w but the last.

    A letter followed by a pair with its own branch uses the pair branch.
    """
    if len(w) < 2:
        return (1, 0, 0, 1)
    br = model.stable_branches if stable else model.branches
    pairs = {} if stable else model._pairs
    a, b = w[-2], w[-1]
    step = pairs[(a, b)].coeffs if (a, b) in pairs else br[a].coeffs
    return mob_mul(_head_matrix(model, w[:-1], stable), step)


@lru_cache(maxsize=1 << 20)
def _interval(model: CantorModel, w: tuple, stable: bool) -> tuple:
    if model.kind == "cf":
        return mob_image01(cf_matrix(w))
    return mob_image01(model.matrix(w, stable))


def classical_model(digit_cap: int) -> CantorModel:
    """Continued fractions with digits 1..digit_cap on the full shift."""
    N = int(digit_cap)
    if N < 1:
        raise ModelError("digit cap must be >= 1")
    gamma_sq = ((N + math.sqrt(N * N + 4)) / 2) ** 2
    # rational rates that bracket the true extremes phi^2 and gamma_N^2
    l1 = Fraction(13, 5)
    l2 = Fraction(math.ceil(gamma_sq * 1000) + 1, 1000)
    l2 = max(l2, Fraction(27, 10))
    rates = RateBounds(l1, l2, l1, l2)
    return CantorModel(
        T=TransitionSet.full(N),
        kind="cf",
        rates=rates,
        digit_cap=N,
        c_lo=Fraction(1, 2),
        c_hi=Fraction(27, 10),
        mixing=True,
        name=f"classical-cap{N}",
    )


def affine_model(ratios_offsets: Sequence[tuple], T: TransitionSet | None = None, rates: RateBounds | None = None,
                 name: str = "") -> CantorModel:
    """Self-similar model from (ratio, offset) pairs: x -> ratio * x + offset."""
    branches = []
    for r, off in ratios_offsets:
        r, off = Fraction(r), Fraction(off)
        branches.append(Branch((r, off, Fraction(0), Fraction(1)), 1 if r > 0 else -1))
    T = T or TransitionSet.full(len(branches))
    if rates is None:
        rs = [abs(Fraction(r)) for r, _ in ratios_offsets]
        rates = RateBounds(1 / max(rs), 1 / min(rs), 1 / max(rs), 1 / min(rs))
    m = CantorModel(T=T, kind="branches", rates=rates, branches=tuple(branches), name=name)
    m.validate()
    return m


# -- public operations -----------------------------------------------------


def continuants(w: Sequence[int], model: CantorModel | None = None) -> tuple:
    """(p, q, q_prev) for the digit word w.

    K() = 1, K(a1) = a1, K(a1..an) = an K(a1..a(n-1)) + K(a1..a(n-2)).
    p is the numerator continuant K(a2..an). Without a model, w holds
    digits >= 1; with a cf model, w holds letters (digit = letter + 1).
    """
    if model is not None:
        _require_cf(model)
        w = [model.digit(a) for a in w]
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    for a in w:
        if int(a) != a or a < 1:
            raise ModelError("continuants need integer digits >= 1")
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q, q_prev


def _require_cf(model):
    if model is not None and model.kind != "cf":
        raise ModelError("operation needs a continued-fraction model")


def cylinder_interval(w: Sequence[int], model: CantorModel) -> Enclosure:
    lo, hi = model.interval(w)
    return Enclosure(lo, hi)


def cylinder_size(w: Sequence[int], model: CantorModel) -> Enclosure:
    return Enclosure.point(model.size_of(w))


def stable_cylinder_size(w: Sequence[int], model: CantorModel) -> Enclosure:
    return Enclosure.point(model.stable_size_of(w))


class _ExpThresholds:
    """ceil(e^k) as exact integers, certified from interval enclosures."""

    def __init__(self):
        self.ceil = [1]

    def get(self, k: int) -> int:
        while len(self.ceil) <= k:
            j = len(self.ceil)
            e = exp_enclosure(j, dps=30 + j // 2)
            lo, hi = math.floor(e.lo), math.floor(e.hi)
            if lo != hi:
                raise ScaleAmbiguityError(f"e^{j} enclosure straddles an integer")
            self.ceil.append(lo + 1)
        return self.ceil[k]


_EXP = _ExpThresholds()


def scale_of_size(size: Fraction) -> int:
    """floor(-ln size) for an exact positive rational size."""
    inv = 1 / size
    if inv.denominator == 1:
        x = inv.numerator
        if x < 1:
            return floor_log_inverse(size)
        k = max(0, int((x.bit_length() - 1) * 0.6931471805599453) - 1)
        while _EXP.get(k + 1) <= x:
            k += 1
        while k > 0 and _EXP.get(k) > x:
            k -= 1
        return k
    return floor_log_inverse(size)


def unstable_scale(w: Sequence[int], model: CantorModel) -> int:
    return scale_of_size(model.size_of(w))


def stable_scale(w: Sequence[int], model: CantorModel) -> int:
    """Scale of the stable cylinder of the forward word w, i.e. of I^s(w^t)."""
    return scale_of_size(model.stable_size_of(transpose(w)))


@dataclass
class ScaleFamily:
    r: int
    words: list
    side: str = "u"

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def scale_family(r: int, model: CantorModel, keep: Optional[Callable[[Word], bool]] = None,
                 side: str = "u", first_letters=None) -> ScaleFamily:
    """Minimal admissible words at scale r passing keep.

    side "u": words minimal under right extension, scale from I^u(w).
    side "s": words minimal under left extension, scale from I^s(w^t).
    keep must be monotone (false on w implies false on every extension).
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    keep = keep or (lambda w: True)
    if side == "u":
        scale = lambda w: unstable_scale(w, model)
        T = model.T
        fix = lambda w: w
    elif side == "s":
        # grow backwards: DFS over reversed words on the reversed relation
        scale = lambda v: scale_of_size(model.stable_size_of(v))
        T = model.T.reversed()
        fix = transpose
    else:
        raise ValueError("side must be 'u' or 's'")

    # accept and extend are asked about the same word back to back
    last = [None, None]

    def status(v):
        if last[0] != v:
            last[0], last[1] = v, (scale(v) >= r, keep(fix(v)))
        return last[1]

    words = []
    for v in enumerate_admissible(
        T,
        accept=lambda v: status(v)[0] and status(v)[1],
        extend=lambda v: not status(v)[0] and status(v)[1],
        first_letters=first_letters,
    ):
        words.append(fix(v))
    return ScaleFamily(r, words, side)


def _ratio_scan(model: CantorModel, depth: int, fn) -> Fraction:
    worst = Fraction(1)
    for w in enumerate_admissible(model.T, accept=lambda w: True, extend=lambda w: len(w) < depth):
        v = fn(w)
        if v is None:
            continue
        worst = max(worst, v, 1 / v)
    return worst


def distortion_ratio(model: CantorModel, depth: int) -> Fraction:
    """Exact max over admissible splits ab, |ab| <= depth, of R or 1/R with
    R = |I(ab)| / (|I(a)| |I(b)|)."""
    if depth < 2:
        raise ValueError("sample depth must be >= 2")
    worst = Fraction(1)
    for w in enumerate_admissible(model.T, accept=lambda w: len(w) >= 2, extend=lambda w: len(w) < depth):
        s = model.size_of(w)
        for i in range(1, len(w)):
            R = s / (model.size_of(w[:i]) * model.size_of(w[i:]))
            worst = max(worst, R, 1 / R)
    return worst


def distortion_constant(model: CantorModel, sample_depth: int) -> Enclosure:
    return log_enclosure(distortion_ratio(model, sample_depth))


def symmetry_ratio(model: CantorModel, depth: int) -> Fraction:
    return _ratio_scan(model, depth, lambda w: model.size_of(w) / model.stable_size_of(transpose(w)))


def symmetry_constant(model: CantorModel, sample_depth: int) -> Enclosure:
    return log_enclosure(symmetry_ratio(model, sample_depth))
