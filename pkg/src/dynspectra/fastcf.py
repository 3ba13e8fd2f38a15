"""Compiled scan of cyclic block words for the classical potential.

Each periodic value is bracketed by running the tail recurrences
x_i = 1 / (a_(i+1) + x_(i+1)) from both ends of the admissible tail range;
the composed maps are monotone, so the two runs enclose the true tails.
Float results are padded outward by PAD before conversion to rationals.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from numba import njit

PAD = 1e-11
_STEPS = 48


@njit(cache=True)
def _periodic_bounds(word, n, tail_lo, tail_hi):
    """(lo, hi) of max_i f(shift^i of word^inf); word holds digits."""
    reps = 1 + (_STEPS + n - 1) // n
    right = np.empty((2, n))
    left = np.empty((2, n))
    for k in range(2):
        x = tail_lo if k == 0 else tail_hi
        for _ in range(reps):
            for i in range(n - 1, -1, -1):
                x = 1.0 / (word[(i + 1) % n] + x)
                right[k, i] = x
        y = tail_lo if k == 0 else tail_hi
        for _ in range(reps):
            for i in range(n):
                y = 1.0 / (word[(i - 1 + n) % n] + y)
                left[k, i] = y
    best_lo = -1.0
    best_hi = -1.0
    for i in range(n):
        lo = word[i] + min(right[0, i], right[1, i]) + min(left[0, i], left[1, i])
        hi = word[i] + max(right[0, i], right[1, i]) + max(left[0, i], left[1, i])
        best_lo = max(best_lo, lo)
        best_hi = max(best_hi, hi)
    return best_lo, best_hi


@njit(cache=True)
def _is_lyndon(seq, k):
    for r in range(1, k):
        for j in range(k):
            a = seq[j]
            b = seq[(j + r) % k]
            if a < b:
                break
            if a > b:
                return False
        else:
            return False
    return True


@njit(cache=True)
def _scan(flat, offsets, lens, max_len, tail_lo, tail_hi, threshold):
    m = lens.shape[0]
    maxk = max_len // lens.min() + 1
    seq = np.zeros(maxk + 1, dtype=np.int64)
    choice = np.zeros(maxk + 2, dtype=np.int64)
    word = np.zeros(max_len + 1, dtype=np.float64)
    best_seq = np.full(maxk + 1, -1, dtype=np.int64)
    stats = np.zeros(2, dtype=np.int64)  # count, n >= threshold
    best = np.array([-1.0, -1.0])
    for first in range(m):
        if lens[first] > max_len:
            continue
        seq[0] = first
        k = 1
        total = lens[first]
        choice[1] = first
        fresh = True
        while True:
            if fresh:
                fresh = False
                if _is_lyndon(seq, k):
                    n = 0
                    for q in range(k):
                        b = seq[q]
                        for r in range(lens[b]):
                            word[n] = flat[offsets[b] + r]
                            n += 1
                    lo, hi = _periodic_bounds(word, n, tail_lo, tail_hi)
                    stats[0] += 1
                    if hi >= threshold:
                        stats[1] += 1
                    if lo > best[0]:
                        best[0] = lo
                    if hi > best[1]:
                        best[1] = hi
                        best_seq[:] = -1
                        best_seq[:k] = seq[:k]
            if k <= maxk and choice[k] < m:
                j = choice[k]
                choice[k] += 1
                if total + lens[j] <= max_len:
                    seq[k] = j
                    total += lens[j]
                    k += 1
                    choice[k] = first
                    fresh = True
                continue
            if k == 1:
                break
            k -= 1
            total -= lens[seq[k]]
    return stats[0], best[0], best[1], best_seq, stats[1]


def scan_cyclic(blocks, digit_of, max_len: int, tail: tuple, threshold: Fraction):
    """Scan every primitive cyclic block word of total length <= max_len.

    Returns (count, max_lo, max_hi, argmax block sequence, count at or
    above threshold); max_lo and max_hi are padded rationals.
    """
    lens = np.array([len(b) for b in blocks], dtype=np.int64)
    offsets = np.zeros(len(blocks), dtype=np.int64)
    offsets[1:] = np.cumsum(lens)[:-1]
    flat = np.array([digit_of(a) for b in blocks for a in b], dtype=np.float64)
    # tails are widened slightly so float rounding of the endpoints is harmless
    tlo = float(tail[0]) * (1 - 1e-15)
    thi = float(tail[1]) * (1 + 1e-15)
    count, lo, hi, seq, nbad = _scan(flat, offsets, lens, int(max_len), tlo, thi, float(threshold) - PAD)
    seq = tuple(int(s) for s in seq if s >= 0)
    return int(count), Fraction(lo) - Fraction(PAD), Fraction(hi) + Fraction(PAD), seq, int(nbad)
