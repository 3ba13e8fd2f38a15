"""Dimension of limit sets of complete subshifts over block alphabets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .enclosure import Enclosure, round_down, round_up
from .geometry import CantorModel, ModelError, cf_matrix
from .sft import BlockAlphabet


class DegenerateSizeError(ValueError):
    pass


@dataclass(frozen=True)
class BlockGeometry:
    blocks: BlockAlphabet
    sizes: tuple  # Enclosure per block
    c1: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "c1", Fraction(self.c1))
        if self.c1 < 0:
            raise ValueError("distortion must be >= 0")
        if len(self.sizes) != len(self.blocks):
            raise ValueError("one size per block")

    @classmethod
    def from_model(cls, blocks: BlockAlphabet, model: CantorModel, c1=Fraction(0)) -> "BlockGeometry":
        sizes = tuple(Enclosure.point(model.size_of(b)) for b in blocks.blocks)
        return cls(blocks, sizes, c1)


def _moran_root(logs: Sequence[float], tol: float) -> tuple:
    """Bracket of the root of sum exp(s * l_i) = 1 on [0, 2] (l_i < 0 not required)."""
    def F(s):
        return math.fsum(math.exp(s * l) for l in logs) - 1.0

    lo, hi = 0.0, 2.0
    if F(hi) >= 0:
        return hi, hi
    if F(lo) <= 0:
        return lo, lo
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def moran_bounds(g: BlockGeometry, tol=Fraction(1, 10**10)) -> tuple:
    """(lower, upper) with sum (e^-c1 size_lo)^s = 1 and sum (e^c1 size_hi)^s = 1.

    Cylinders of a concatenation of n blocks lie between the products of
    the shrunk and inflated block sizes, so the two roots bracket the
    dimension. Results are rounded outward to a 1e-12 grid.
    """
    if not g.blocks or len(g.blocks) < 1:
        raise ValueError("need at least one block")
    for s in g.sizes:
        if s.lo <= 0 or s.hi >= 1:
            raise DegenerateSizeError(f"block size enclosure {s} touches 0 or 1")
    c1 = float(g.c1)
    lo_logs = [math.log(s.lo) - c1 for s in g.sizes]
    hi_logs = [math.log(s.hi) + c1 for s in g.sizes]
    ftol = float(tol)
    lower, _ = _moran_root(lo_logs, ftol)
    _, upper = _moran_root(hi_logs, ftol)
    # float slack of a few ulps in the sums is far below the 1e-12 grid
    lower = max(Fraction(0), round_down(Fraction(lower) - Fraction(1, 10**13)))
    upper = round_up(Fraction(upper) + Fraction(1, 10**13))
    return lower, upper


def _log_q(word) -> float:
    _, _, c, d = cf_matrix(tuple(word))
    return math.log(d)


def pressure_root(blocks: Sequence[tuple], k: int, tol: float = 1e-13) -> float:
    """Root of Z_k(s) = Z_(k-1)(s), Z_k = sum over k-block words of q^-2s."""
    def Z(n, s):
        if n == 0:
            return 1.0
        return math.fsum(math.exp(-2 * s * lq) for lq in logs[n])

    logs = {}
    for n in (k - 1, k):
        if n >= 1:
            logs[n] = [_log_q(tuple(itertools.chain.from_iterable(ws))) for ws in itertools.product(blocks, repeat=n)]
    lo, hi = 0.0, 2.0
    g = lambda s: Z(k, s) - Z(k - 1, s)
    if g(lo) <= 0:
        return 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def pressure_dimension_cf(blocks, model: CantorModel | None = None, order: int = 6,
                          tol=Fraction(1, 10**9)) -> Enclosure:
    """Pressure-zero estimate for the CF limit set of free block concatenations.

    blocks are letter words (digit = letter + 1). The estimates at orders
    k and k+1 alternate around the limit; their hull, padded by tol, is
    returned.
    """
    if model is not None and model.kind != "cf":
        raise ModelError("pressure refinement needs a continued-fraction model")
    if order < 1:
        raise ValueError("order must be >= 1")
    if isinstance(blocks, BlockAlphabet):
        blocks = blocks.blocks
    blocks = [tuple(b) for b in blocks]
    a = pressure_root(blocks, order)
    b = pressure_root(blocks, order + 1)
    tol = Fraction(tol)
    lo = round_down(Fraction(min(a, b))) - tol
    hi = round_up(Fraction(max(a, b))) + tol
    return Enclosure(max(lo, Fraction(0)) if min(a, b) > 0 else lo, hi)
