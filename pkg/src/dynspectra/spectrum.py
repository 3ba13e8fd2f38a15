"""Sublevel-set machinery: survival verdicts, counts N_u(t, r), the
submultiplicativity check, the box-dimension estimator and spectrum slices.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .enclosure import Enclosure, frac_str, log_enclosure, round_down, round_up
from .geometry import CantorModel, scale_family
from .potential import periodic_values, periodic_window
from .sft import PeriodicPoint, is_admissible

SURVIVES = "Survives"
DIES = "Dies"
UNKNOWN = "Unknown"

# widths used when certifying a periodic witness against t
_WITNESS_TOLS = (Fraction(1, 10**12), Fraction(1, 10**24), Fraction(1, 10**48))
# room beyond |w| for witnesses and refutation when |w| already reaches depth
_SLACK = 8
# arm lengths tried when certifying an eventually periodic witness
_HETERO_ARMS = (8, 16, 32)
_HETERO_MAX_PERIOD = 6
_HETERO_MAX_SIDE = 256


@dataclass(frozen=True)
class SurvivalVerdict:
    status: str
    witness: Optional[tuple] = None  # period word (Survives) or (word, center) (Dies)
    value: Optional[Enclosure] = None

    @property
    def survives(self) -> bool:
        return self.status == SURVIVES

    @property
    def dies(self) -> bool:
        return self.status == DIES


@dataclass(frozen=True)
class CountRecord:
    t: Fraction
    r: int
    lower_count: int
    upper_count: int
    family_size: int = 0
    side: str = "u"


@dataclass
class DimensionEstimate:
    t: Fraction
    r_max: int
    sequence: list  # (r, lower, upper, log_upper_over_r or None)
    lower_bound: Fraction
    upper_bound: Fraction
    c_used: int
    side: str = "u"
    certificate: object = None

    def to_json(self) -> dict:
        return {
            "t": frac_str(self.t),
            "r_max": self.r_max,
            "side": self.side,
            "c_used": self.c_used,
            "lower_bound": frac_str(self.lower_bound),
            "upper_bound": frac_str(self.upper_bound),
            "sequence": [
                {"r": r, "lower": lo, "upper": up, "log_upper_over_r": None if v is None else frac_str(v)}
                for r, lo, up, v in self.sequence
            ],
        }


# -- window closures ---------------------------------------------------------


def closing_window(word: tuple, t: Fraction, p, model: CantorModel, centers=None) -> Optional[int]:
    """A center whose window inside word has f-lower-bound > t, else None."""
    rng = range(len(word)) if centers is None else centers
    for c in rng:
        if p.bounds(word, c, model).lo > t:
            return c
    return None


def certify_periodic_le(period: tuple, t: Fraction, p, model: CantorModel):
    """(True, enc) if m(period^inf) <= t is certified, (False, enc) if > t, (None, enc) if unresolved."""
    enc = None
    for tol in _WITNESS_TOLS:
        vals = periodic_values(period, p, model, tol)
        enc = Enclosure(max(e.lo for e in vals), max(e.hi for e in vals))
        if enc.hi <= t:
            return True, enc
        if enc.lo > t:
            return False, enc
    return None, enc


# -- verdict cache -----------------------------------------------------------


def model_key(p, model: CantorModel) -> str:
    payload = {
        "kind": model.kind,
        "size": model.size,
        "T": sorted(model.T.allowed),
        "cap": model.digit_cap,
        "branches": [[frac_str(x) for x in b.coeffs] for b in model.branches],
        "stable": [[frac_str(x) for x in b.coeffs] for b in model.stable_branches],
        "pairs": [[list(k), [frac_str(x) for x in b.coeffs]] for k, b in model.pair_branches],
        "potential": p.hash_payload(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:24]


class VerdictCache:
    """In-memory verdict store, optionally backed by SPECTRA_CACHE_DIR."""

    def __init__(self):
        self.mem = {}
        self.loaded = set()

    def _path(self, key, t, depth):
        root = os.environ.get("SPECTRA_CACHE_DIR")
        if not root:
            return None
        name = hashlib.sha256(f"{key}|{frac_str(t)}|{depth}".encode()).hexdigest()[:32]
        return os.path.join(root, name + ".json")

    def table(self, key, t, depth) -> dict:
        k = (key, t, depth)
        tab = self.mem.setdefault(k, {})
        if k not in self.loaded:
            self.loaded.add(k)
            path = self._path(key, t, depth)
            if path and os.path.exists(path):
                try:
                    with open(path) as fh:
                        for ws, st in json.load(fh).items():
                            tab.setdefault(tuple(int(x) for x in ws.split(",")), SurvivalVerdict(st))
                except (OSError, ValueError):
                    pass
        return tab

    def flush(self, key, t, depth) -> None:
        path = self._path(key, t, depth)
        if not path:
            return
        tab = self.mem.get((key, t, depth), {})
        os.makedirs(os.path.dirname(path), exist_ok=True)
        data = {",".join(map(str, w)): v.status for w, v in sorted(tab.items())}
        tmp = path + f".{os.getpid()}.tmp"
        with open(tmp, "w") as fh:
            json.dump(data, fh, sort_keys=True)
        os.replace(tmp, path)


CACHE = VerdictCache()


# -- survival ----------------------------------------------------------------


def _witness_search(w: tuple, t: Fraction, max_len: int, p, model: CantorModel):
    """Periodic completions w.v by increasing |v|, low letters first."""
    T = model.T
    frontier = [()]
    for extra in range(0, max_len - len(w) + 1):
        nxt = []
        for v in frontier:
            word = w + v
            if T.allows(word[-1], word[0]):
                ok, enc = certify_periodic_le(word, t, p, model)
                if ok:
                    return word, enc
            if extra == max_len - len(w):
                continue
            for b in T.successors(word[-1]):
                cand = word + (b,)
                # only windows whose right arm grew can newly close
                if closing_window(cand, t, p, model, centers=range(len(cand))) is None:
                    nxt.append(v + (b,))
        frontier = nxt
        if not frontier:
            break
    return None, None


def _side_tails(w: tuple, t: Fraction, budget: int, p, model: CantorModel, left: bool) -> list:
    """Candidate (period, connector) tails on one side of w, shortest first.

    On the right a tail v.q^inf is returned as (q, v); on the left q^inf.u as (q, u).
    """
    T = model.T
    out, seen = [], set()
    frontier = [()]
    for _ in range(budget):
        nxt = []
        for x in frontier:
            succ = T.predecessors(x[0] if x else w[0]) if left else T.successors(x[-1] if x else w[-1])
            for b in succ:
                y = (b,) + x if left else x + (b,)
                word = y + w if left else w + y
                if closing_window(word, t, p, model) is not None:
                    continue
                nxt.append(y)
                for k in range(1, min(len(y), _HETERO_MAX_PERIOD) + 1):
                    per, con = (y[:k], y[k:]) if left else (y[-k:], y[:-k])
                    if (per, con) in seen or not T.allows(per[-1], per[0]):
                        continue
                    seen.add((per, con))
                    out.append((per, con))
                    if len(out) >= _HETERO_MAX_SIDE:
                        return out
        frontier = nxt
        if not frontier:
            break
    return out


def _periodic_hi(period: tuple, arm: int, p, model: CantorModel) -> Fraction:
    best = None
    for i in range(len(period)):
        word, c = periodic_window(period, i, arm)
        hi = p.bounds(word, c, model).hi
        best = hi if best is None or hi > best else best
    return best


def certify_eventually_periodic_le(lper: tuple, u: tuple, w: tuple, v: tuple, rper: tuple, t: Fraction, p,
                                   model: CantorModel) -> bool:
    """True if the point lper^inf . u w v . rper^inf has every value of f <= t.

    With a fixed arm A, positions deep in either tail see a purely periodic
    A-window, covered by the periodic check; every other position has its
    A-window inside the finite word lper^a u w v rper^b.
    """
    for arm in _HETERO_ARMS:
        if _periodic_hi(lper, arm, p, model) > t or _periodic_hi(rper, arm, p, model) > t:
            continue
        a = -(-2 * arm // len(lper))
        b = -(-2 * arm // len(rper))
        X = lper * a + u + w + v + rper * b
        if all(p.bounds(X[c - arm:c + arm + 1], arm, model).hi <= t for c in range(arm, len(X) - arm)):
            return True
    return False


def _hetero_search(w: tuple, t: Fraction, budget: int, p, model: CantorModel, max_pairs: int = 64):
    """Eventually periodic witness q^inf.u w v.q'^inf, for survivors off every periodic orbit."""
    lefts = _side_tails(w, t, budget, p, model, left=True)
    if not lefts:
        return None
    rights = _side_tails(w, t, budget, p, model, left=False)
    pairs = sorted(((lp, u, rp, v) for lp, u in lefts for rp, v in rights),
                   key=lambda z: (len(z[0]) + len(z[1]) + len(z[2]) + len(z[3]), z))
    for lp, u, rp, v in pairs[:max_pairs]:
        if certify_eventually_periodic_le(lp, u, w, v, rp, t, p, model):
            return (lp, u, w, v, rp)
    return None


def _refute(w: tuple, t: Fraction, max_len: int, p, model: CantorModel):
    """True if every two-sided extension of w closes within total length max_len."""
    T = model.T
    stack = [(w, 0)]
    while stack:
        word, nleft = stack.pop()
        if closing_window(word, t, p, model) is not None:
            continue
        if len(word) >= max_len:
            return False
        # grow the shorter side so both arms lengthen together
        if nleft <= len(word) - len(w) - nleft:
            for b in T.predecessors(word[0]):
                stack.append(((b,) + word, nleft + 1))
        else:
            for b in T.successors(word[-1]):
                stack.append((word + (b,), nleft))
    return True


def survives(w, t, depth: int, p, model: CantorModel, cache: bool = True) -> SurvivalVerdict:
    """Three-valued membership test for I(w) meeting K_t.

    Dies: every admissible completion has a window with lower bound > t.
    Survives: a periodic completion, or an eventually periodic point
    q^inf.u w v.q'^inf, with certified Markov value <= t.
    Unknown: neither found within total word length max(depth, |w| + slack).
    """
    w = tuple(w)
    t = Fraction(t)
    D = max(depth, len(w))
    tab = CACHE.table(model_key(p, model), t, D) if cache else None
    if tab is not None and w in tab:
        return tab[w]
    c = closing_window(w, t, p, model)
    if c is not None:
        v = SurvivalVerdict(DIES, witness=(w, c))
    else:
        per, enc = _witness_search(w, t, max(D, len(w) + _SLACK), p, model)
        het = None if per is not None else _hetero_search(w, t, max(D - len(w), _SLACK), p, model)
        if per is not None:
            v = SurvivalVerdict(SURVIVES, witness=per, value=enc)
        elif het is not None:
            v = SurvivalVerdict(SURVIVES, witness=het)
        elif _refute(w, t, max(D, len(w) + _SLACK), p, model):
            v = SurvivalVerdict(DIES)
        else:
            v = SurvivalVerdict(UNKNOWN)
    if tab is not None:
        tab[w] = v
    return v


# -- counting ----------------------------------------------------------------


def _count_part(args):
    t, r, depth, p, model, side, letters = args
    keep = lambda w: closing_window(w, t, p, model) is None
    fam = scale_family(r, model, keep=keep, side=side, first_letters=letters)
    lo = up = 0
    for w in fam.words:
        v = survives(w, t, depth, p, model)
        if v.status == SURVIVES:
            lo += 1
            up += 1
        elif v.status == UNKNOWN:
            up += 1
    return lo, up, len(fam.words)


def count_sublevel(t, r: int, depth: int, p, model: CantorModel, side: str = "u", threads: int = 1) -> CountRecord:
    t = Fraction(t)
    letters = list(model.T.letters)
    if threads > 1 and len(letters) > 1:
        parts = [(t, r, depth, p, model, side, [a]) for a in letters]
        with ProcessPoolExecutor(max_workers=min(threads, len(letters))) as ex:
            res = list(ex.map(_count_part, parts))
    else:
        res = [_count_part((t, r, depth, p, model, side, None))]
    lo = sum(x[0] for x in res)
    up = sum(x[1] for x in res)
    n = sum(x[2] for x in res)
    CACHE.flush(model_key(p, model), t, depth)
    return CountRecord(t, r, lo, up, n, side)


def check_submultiplicative(t, m: int, n: int, c: int, depth: int, p, model: CantorModel, side: str = "u",
                            threads: int = 1):
    Nmn = count_sublevel(t, m + n, depth, p, model, side, threads).upper_count
    Nm = count_sublevel(t, m, depth, p, model, side, threads).upper_count
    Nn = count_sublevel(t, n, depth, p, model, side, threads).upper_count
    ok = Nmn <= model.size**c * Nm * Nn
    return ok, (Nmn, Nm, Nn)


def calibrate_c(ts, p, model: CantorModel, depth: int, max_sum: int = 14, side: str = "u", threads: int = 1) -> int:
    """Smallest integer c with N(m+n) <= |A|^c N(m) N(n) for all m + n <= max_sum and t in ts."""
    k = model.size
    c = 0
    for t in ts:
        counts = {r: count_sublevel(t, r, depth, p, model, side, threads).upper_count for r in range(1, max_sum + 1)}
        for m in range(1, max_sum):
            for n in range(m, max_sum - m + 1):
                big, prod = counts[m + n], counts[m] * counts[n]
                while big > k**c * prod:
                    if prod == 0:
                        raise ArithmeticError(f"N({m + n}) > 0 while N({m})N({n}) = 0 at t={t}")
                    c += 1
    return c


def estimate_dimension(t, r_max: int, depth: int, c: int, p, model: CantorModel, side: str = "u",
                       threads: int = 1, extract: Optional[dict] = None, r_min: int = 1) -> DimensionEstimate:
    """Upper bound min_r ln(|A|^c N(t, r)) / r; lower bound from a certified
    complete subshift when extract holds ExtractionParams keywords."""
    t = Fraction(t)
    seq = []
    upper = None
    for r in range(r_min, r_max + 1):
        rec = count_sublevel(t, r, depth, p, model, side, threads)
        if rec.upper_count == 0:
            val = Fraction(0)
        else:
            val = round_up(log_enclosure(Fraction(model.size**c * rec.upper_count)).hi / r)
        seq.append((r, rec.lower_count, rec.upper_count, val if rec.upper_count else None))
        upper = val if upper is None else min(upper, val)
    lower = Fraction(0)
    cert = None
    if extract is not None:
        from .extraction import ExtractionParams, NoCertificateError, extract_subshift

        try:
            cert = extract_subshift(ExtractionParams(t=t, **extract), p, model)
            lower = round_down(cert.dim_lower)
        except NoCertificateError:
            pass
    lower = min(lower, upper) if upper is not None else lower
    return DimensionEstimate(t, r_max, seq, lower, upper if upper is not None else Fraction(0), c, side, cert)


# -- slices ------------------------------------------------------------------


def lyndon_words(k: int, n: int):
    """Lyndon words over 0..k-1 of length <= n, in lexicographic order (Duval)."""
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        yield tuple(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()


def spectrum_slice(t, period_max: int, p, model: CantorModel, tol=Fraction(1, 10**15)) -> list:
    """Distinct certified Markov values <= t of periodic points with period <= period_max."""
    t = Fraction(t)
    T = model.T
    found = []
    for w in lyndon_words(model.size, period_max):
        if not (is_admissible(w, T) and T.allows(w[-1], w[0])):
            continue
        if closing_window(w + w + w, t, p, model, centers=range(len(w), 2 * len(w))) is not None:
            continue
        ok, enc = certify_periodic_le(w, t, p, model)
        if ok:
            found.append((enc, PeriodicPoint(w)))
    # merge values whose enclosures overlap after refinement
    found.sort(key=lambda x: (x[0].lo, len(x[1].period_word), x[1].period_word))
    out = []
    for enc, pp in found:
        if out and out[-1][0].overlaps(enc):
            prev = out[-1]
            a = _refined(prev[1].period_word, p, model)
            b = _refined(pp.period_word, p, model)
            if a.overlaps(b):
                continue
        out.append((enc, pp))
    tol = Fraction(tol)
    res = []
    for enc, pp in out:
        if enc.width > tol:
            vals = periodic_values(pp.period_word, p, model, tol)
            enc = Enclosure(max(e.lo for e in vals), max(e.hi for e in vals))
        res.append((enc, pp))
    res.sort(key=lambda x: (x[0].lo, len(x[1].period_word), x[1].period_word))
    return res


def _refined(period, p, model) -> Enclosure:
    vals = periodic_values(period, p, model, Fraction(1, 10**60))
    return Enclosure(max(e.lo for e in vals), max(e.hi for e in vals))
