"""Constructive search for complete subshifts inside a sublevel set.

Pipeline: survivors B0 of P_r0 at level t - eps0, a junction graph on B0
whose edges are certified by window upper bounds, the best strongly
connected piece turned into a block alphabet (complete core or paths
through a hub block), exhaustive certification of sup f, and a Moran lower
bound for the dimension of the limit set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import networkx as nx

from .dimension import BlockGeometry, moran_bounds
from .enclosure import Enclosure, frac_str, round_down, round_up
from .geometry import CantorModel, cf_matrix, distortion_constant, mob_image, scale_family
from .potential import Tails, digit_tail, periodic_values
from .sft import BlockAlphabet, GlueError, build_block_alphabet, is_admissible
from .spectrum import SURVIVES, closing_window, lyndon_words, survives

_GRID = Fraction(1, 10**40)


class NoCertificateError(RuntimeError):
    pass


class NotBelowThresholdError(ValueError):
    def __init__(self, word, value, words=()):
        self.word = tuple(word)
        self.value = value
        self.words = [tuple(w) for w in words] or [self.word]
        super().__init__(f"sup f reaches {float(value.hi):.12g} on {self.word}; not below threshold")


@dataclass
class ExtractionParams:
    t: Fraction
    eta: Fraction = Fraction(1, 2)
    r0: int = 6
    depth: int = 12
    certify_len: Optional[int] = None  # default 3 * max block length
    eps_exponents: tuple = tuple(range(3, 11))
    safety: Fraction = Fraction(3, 2)
    distortion_depth: int = 6
    c1: Optional[Fraction] = None
    upper_estimate: Optional[Fraction] = None
    hub_path_len: int = 2
    max_blocks: int = 4096

    def __post_init__(self):
        self.t = Fraction(self.t)
        self.eta = Fraction(self.eta)
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.r0 < 1:
            raise ValueError("r0 must be >= 1")


@dataclass
class SubshiftCertificate:
    blocks: BlockAlphabet
    delta: Fraction
    sup_bound: Enclosure
    dim_lower: Fraction
    method: str
    t: Fraction
    certify_len: int
    checked: list = field(default_factory=list)  # (cyclic word, Enclosure)
    checked_count: int = 0
    level: Optional[Fraction] = None
    eps0: Optional[Fraction] = None
    r0: int = 0
    c1: Fraction = Fraction(0)
    m0: int = 0

    def to_json(self) -> dict:
        return {
            "t": frac_str(self.t),
            "blocks": [list(b) for b in self.blocks.blocks],
            "delta": frac_str(self.delta),
            "sup_bound": self.sup_bound.to_json(),
            "dim_lower": frac_str(self.dim_lower),
            "method": self.method,
            "certify_len": self.certify_len,
            "r0": self.r0,
            "eps0": None if self.eps0 is None else frac_str(self.eps0),
            "level": None if self.level is None else frac_str(self.level),
            "c1": frac_str(self.c1),
            "m0": self.m0,
            "checked_count": self.checked_count,
            "checked": [{"word": list(w), "value": e.to_json()} for w, e in self.checked],
        }


@dataclass
class CriticalWindowReport:
    block_word: list
    windows: list = field(default_factory=list)  # certified (i, j, n)
    possible: list = field(default_factory=list)  # straddling, witnesses unresolved
    radii: list = field(default_factory=list)


# -- constants ---------------------------------------------------------------


def _ln(x: Fraction) -> float:
    import math

    return math.log(x.numerator) - math.log(x.denominator)


def m0_constant(model: CantorModel, r0: int, R_tilde=0) -> int:
    """3 ceil((1/theta + R_tilde) * l2/l1) with l1, l2 the extreme word lengths in P_r0.

    theta = min(ln l1u / ln l2s, ln l1s / ln l2u) / 2 from the rate bounds.
    """
    import math

    rb = model.rates
    theta = 0.5 * min(_ln(rb.l1u) / _ln(rb.l2s), _ln(rb.l1s) / _ln(rb.l2u))
    fam = scale_family(r0, model)
    lens = [len(w) for w in fam.words]
    ratio = Fraction(max(lens), min(lens))
    # tiny slack keeps exact integers (self-similar case) from rounding up
    return 3 * math.ceil((1 / theta + float(R_tilde)) * float(ratio) - 1e-9)


def min_spectrum_estimate(p, model: CantorModel, period_max: int = 4) -> Fraction:
    """Smallest Markov value (upper end of its enclosure) over short periodic points."""
    best = None
    for w in lyndon_words(model.size, period_max):
        if not (is_admissible(w, model.T) and model.T.allows(w[-1], w[0])):
            continue
        vals = periodic_values(w, p, model, Fraction(1, 10**15))
        hi = max(e.hi for e in vals)
        best = hi if best is None else min(best, hi)
    return best


# -- tail contexts -----------------------------------------------------------


def _round_out(lo: Fraction, hi: Fraction) -> tuple:
    return round_down(lo, 40), round_up(hi, 40)


class _CFContext:
    """Tail intervals of free concatenations for the classical potential."""

    def __init__(self, blocks: Sequence[tuple], p, model: CantorModel):
        self.p, self.model = p, model
        self.blocks = list(blocks)
        self.right = self._fixed([cf_matrix(b) for b in self.blocks])
        self.left = self._fixed([cf_matrix(tuple(reversed(b))) for b in self.blocks])

    def _fixed(self, mats) -> tuple:
        J = digit_tail([self.model.digit(a) for a in self.model.T.letters])
        for _ in range(400):
            lo = hi = None
            for m in mats:
                a, b = mob_image(m, *J)
                lo = a if lo is None or a < lo else lo
                hi = b if hi is None or b > hi else hi
            lo, hi = _round_out(max(lo, J[0]), min(hi, J[1]))
            if (lo, hi) == J or (hi - lo) >= (J[1] - J[0]) - _GRID:
                J = (lo, hi)
                break
            J = (lo, hi)
        return J

    def after(self, b) -> tuple:
        """Right tail seen from the end of a block followed by b and free blocks."""
        return mob_image(cf_matrix(b), *self.right)

    def before(self, b) -> tuple:
        return mob_image(cf_matrix(tuple(reversed(b))), *self.left)

    def hi(self, block, c, left=None, right=None) -> Fraction:
        tails = Tails(self.left if left is None else left, self.right if right is None else right)
        return self.p.bounds(block, c, self.model, tails).hi

    def lo(self, block, c, left=None, right=None) -> Fraction:
        tails = Tails(self.left if left is None else left, self.right if right is None else right)
        return self.p.bounds(block, c, self.model, tails).lo


class _TableContext:
    """Context words of length radius drawn from free concatenations."""

    def __init__(self, blocks: Sequence[tuple], p, model: CantorModel):
        self.p, self.model = p, model
        self.blocks = list(blocks)
        self.w = p.radius
        self.right = self._prefixes(())
        self.left = self._suffixes(())

    def _prefixes(self, head: tuple) -> frozenset:
        out, w = set(), self.w
        stack = [head]
        while stack:
            s = stack.pop()
            if len(s) >= w:
                out.add(s[:w])
                continue
            for b in self.blocks:
                stack.append(s + b)
        return frozenset(out)

    def _suffixes(self, tail: tuple) -> frozenset:
        out, w = set(), self.w
        stack = [tail]
        while stack:
            s = stack.pop()
            if len(s) >= w:
                out.add(s[len(s) - w:])
                continue
            for b in self.blocks:
                stack.append(b + s)
        return frozenset(out)

    def after(self, b):
        return self._prefixes(tuple(b))

    def before(self, b):
        return self._suffixes(tuple(b))

    def _vals(self, block, c, left, right):
        left = self.left if left is None else left
        right = self.right if right is None else right
        for lc in left:
            for rc in right:
                word = lc + tuple(block) + rc
                if is_admissible(word, self.model.T):
                    yield self.p.bounds(word, c + len(lc), self.model)

    def hi(self, block, c, left=None, right=None) -> Fraction:
        return max(e.hi for e in self._vals(block, c, left, right))

    def lo(self, block, c, left=None, right=None) -> Fraction:
        return min(e.lo for e in self._vals(block, c, left, right))


def _context(blocks, p, model):
    if getattr(p, "kind", "") == "table":
        return _TableContext(blocks, p, model)
    return _CFContext(blocks, p, model)


# -- graph -------------------------------------------------------------------


def junction_graph(S: Sequence[tuple], level: Fraction, p, model: CantorModel) -> nx.DiGraph:
    """Edge b -> b' when every window centered in b b' stays <= level,
    whatever free concatenation of S surrounds the pair."""
    ctx = _context(S, p, model)
    T = model.T
    after = [ctx.after(b) for b in S]
    before = [ctx.before(b) for b in S]
    # each neighbor's tail set lies inside the free hull, so a block that
    # passes against the hull passes against every neighbor
    ok_any = [all(ctx.hi(b, c) <= level for c in range(len(b))) for b in S]
    g = nx.DiGraph()
    g.add_nodes_from(range(len(S)))
    for i, b in enumerate(S):
        for j, b2 in enumerate(S):
            if not T.allows(b[-1], b2[0]):
                continue
            if (ok_any[i] or all(ctx.hi(b, c, right=after[j]) <= level for c in range(len(b)))) and \
                    (ok_any[j] or all(ctx.hi(b2, c, left=before[i]) <= level for c in range(len(b2)))):
                g.add_edge(i, j)
    return g


def _useful_components(g: nx.DiGraph) -> list:
    comps = []
    for comp in nx.strongly_connected_components(g):
        comp = sorted(comp)
        if len(comp) > 1 or g.has_edge(comp[0], comp[0]):
            comps.append(comp)
    # largest first, then lexicographic for determinism
    comps.sort(key=lambda c: (-len(c), c))
    return comps


def _complete_core(g: nx.DiGraph, nodes: list) -> list:
    order = sorted(nodes, key=lambda v: (-(g.in_degree(v) + g.out_degree(v)), v))
    core = []
    for v in order:
        if not g.has_edge(v, v):
            continue
        if all(g.has_edge(v, u) and g.has_edge(u, v) for u in core):
            core.append(v)
    return sorted(core)


def _hub_blocks(g: nx.DiGraph, nodes: list, S: list, max_len: int, cap: int) -> list:
    """First-return loops h -> v1 -> ... -> vk -> h with k < max_len, as letter words."""
    sub = g.subgraph(nodes)
    hub = sorted(nodes, key=lambda v: (-(sub.in_degree(v) + sub.out_degree(v)), v))[0]
    out = []
    stack = [(hub,)]
    while stack and len(out) < cap:
        path = stack.pop()
        last = path[-1]
        if len(path) > 1 or sub.has_edge(hub, hub):
            if sub.has_edge(last, hub) and (len(path) > 1 or last == hub):
                out.append(path)
        if len(path) <= max_len:
            for v in sorted(sub.successors(last), reverse=True):
                if v != hub:
                    stack.append(path + (v,))
    words = sorted({tuple(itertools.chain.from_iterable(S[i] for i in path)) for path in out})
    return words


# -- certification -----------------------------------------------------------


def _cyclic_block_words(blocks: BlockAlphabet, max_len: int):
    """Primitive cyclic block sequences (Lyndon over block indices) of total length <= max_len."""
    lens = [len(b) for b in blocks.blocks]
    m = len(lens)
    stack = [((i,), lens[i]) for i in reversed(range(m))]
    while stack:
        seq, n = stack.pop()
        if _is_lyndon(seq):
            yield seq
        for j in reversed(range(seq[0], m)):
            if n + lens[j] <= max_len:
                stack.append((seq + (j,), n + lens[j]))


def _is_lyndon(s: tuple) -> bool:
    n = len(s)
    return all(s < s[i:] + s[:i] for i in range(1, n))


def outer_sup(blocks: BlockAlphabet, p, model: CantorModel) -> tuple:
    """Certified upper bound of f over every bi-infinite concatenation, with the argmax position."""
    ctx = _context(blocks.blocks, p, model)
    best, arg = None, None
    for b in blocks.blocks:
        for c in range(len(b)):
            h = ctx.hi(b, c)
            if best is None or h > best:
                best, arg = h, (b, c)
    return best, arg


def count_block_sequences(blocks: BlockAlphabet, max_len: int) -> int:
    """Number of block sequences (not up to rotation) of total length <= max_len."""
    lens = [len(b) for b in blocks.blocks]
    ways = [1] + [0] * max_len
    for n in range(1, max_len + 1):
        ways[n] = sum(ways[n - l] for l in lens if l <= n)
    return sum(ways[1:])


def certify_delta(blocks: BlockAlphabet, t, certify_len: int, p, model: CantorModel,
                  record: Optional[list] = None, tol=Fraction(1, 10**9), record_cap: int = 20000,
                  stats: Optional[dict] = None) -> tuple:
    """(delta, sup_bound) with sup f over Sigma(blocks) <= t - delta.

    The upper end combines an outer bound over all free concatenations
    with the periodic values of every cyclic block word of total length
    <= certify_len; the lower end is the largest realized periodic value.
    Large classical scans run compiled and record only the argmax word.
    """
    t = Fraction(t)
    if certify_len < blocks.max_len:
        raise ValueError("certify_len must be at least the longest block")
    outer, arg = outer_sup(blocks, p, model)
    if getattr(p, "kind", "") == "classical" and count_block_sequences(blocks, certify_len) > record_cap:
        return _certify_fast(blocks, t, certify_len, p, model, record, outer, arg, stats)
    real_lo = cyc_hi = None
    bad = []
    n_checked = 0
    for seq in _cyclic_block_words(blocks, certify_len):
        n_checked += 1
        word = blocks.word(seq)
        vals = periodic_values(word, p, model, tol, arm0=len(word))
        enc = Enclosure(max(e.lo for e in vals), max(e.hi for e in vals))
        if record is not None:
            record.append((word, enc))
        real_lo = enc.lo if real_lo is None else max(real_lo, enc.lo)
        cyc_hi = enc.hi if cyc_hi is None else max(cyc_hi, enc.hi)
        if enc.hi >= t:
            bad.append((enc.hi, word, enc))
    if stats is not None:
        stats.update(count=n_checked, mode="exact scan, all words recorded")
    hi = outer if cyc_hi is None else max(outer, cyc_hi)
    sup = Enclosure(min(real_lo, hi), hi)
    delta = t - sup.hi
    if delta <= 0:
        if bad:
            bad.sort(key=lambda x: (-x[0], x[1]))
            raise NotBelowThresholdError(bad[0][1], bad[0][2], [w for _, w, _ in bad])
        raise NotBelowThresholdError(arg[0], Enclosure(outer, outer))
    return delta, sup


def _certify_fast(blocks, t, certify_len, p, model, record, outer, arg, stats):
    from .fastcf import scan_cyclic

    tail = digit_tail([model.digit(a) for a in model.T.letters])
    count, lo, hi, seq, nbad = scan_cyclic(blocks.blocks, model.digit, certify_len, tail, t)
    word = blocks.word(seq)
    enc = Enclosure(lo, hi)
    if record is not None:
        record.append((word, Enclosure(*periodic_bounds_exact(word, p, model))))
    if stats is not None:
        stats.update(count=count, mode="compiled scan, argmax word recorded")
    top = max(outer, hi)
    sup = Enclosure(min(lo, top), top)
    delta = t - sup.hi
    if delta <= 0:
        if hi >= t:
            raise NotBelowThresholdError(word, enc)
        raise NotBelowThresholdError(arg[0], Enclosure(outer, outer))
    return delta, sup


def periodic_bounds_exact(word, p, model, tol=Fraction(1, 10**9)) -> tuple:
    vals = periodic_values(tuple(word), p, model, tol, arm0=len(word))
    return max(e.lo for e in vals), max(e.hi for e in vals)


# -- critical windows --------------------------------------------------------


def _extensions(model, word, n):
    T = model.T
    for left in itertools.product(T.letters, repeat=n):
        for right in itertools.product(T.letters, repeat=n):
            w = left + word + right
            if is_admissible(w, T):
                yield w, len(left)


def detect_critical_windows(blocks_word: Sequence[tuple], t, m0: int, p, model: CantorModel,
                            witness_len: int = 3) -> CriticalWindowReport:
    """Block ranges (i, j) with j - i even, j - i >= 2 m0 + 2, and a position n in
    the middle block whose window straddles t. Certified when completions
    realizing values <= t and >= t are found within witness_len letters."""
    t = Fraction(t)
    blocks_word = [tuple(b) for b in blocks_word]
    k = len(blocks_word)
    rep = CriticalWindowReport(blocks_word)
    starts = [0]
    for b in blocks_word:
        starts.append(starts[-1] + len(b))
    for i in range(k):
        for j in range(i + 2 * m0 + 2, k, 2):
            mid = (i + j) // 2
            word = tuple(itertools.chain.from_iterable(blocks_word[i:j + 1]))
            for n in range(len(blocks_word[mid])):
                c = starts[mid] - starts[i] + n
                enc = p.bounds(word, c, model)
                if not (enc.lo <= t <= enc.hi):
                    continue
                below = enc.hi <= t
                above = enc.lo >= t
                for L in range(1, witness_len + 1):
                    if below and above:
                        break
                    for ext, off in _extensions(model, word, L):
                        e = p.bounds(ext, c + off, model)
                        below = below or e.hi <= t
                        above = above or e.lo >= t
                        if below and above:
                            break
                if below and above:
                    rep.windows.append((i, j, n))
                    rep.radii.append((j - i) // 2)
                else:
                    rep.possible.append((i, j, n))
    return rep


# -- extraction --------------------------------------------------------------


def _survivors(level: Fraction, r0: int, depth: int, p, model: CantorModel) -> list:
    keep = lambda w: closing_window(w, level, p, model) is None
    fam = scale_family(r0, model, keep=keep)
    return [w for w in fam.words if survives(w, level, depth, p, model).status == SURVIVES]


def _candidate(S0: list, level: Fraction, p, model: CantorModel, params: ExtractionParams, c1: Fraction):
    """Best block alphabet found from survivors S0 at this level, or None."""
    S = list(S0)
    comp = None
    for _ in range(20):
        g = junction_graph(S, level, p, model)
        comps = _useful_components(g)
        if not comps:
            comp = None
            break
        comp = comps[0]
        if len(comp) == len(S):
            break
        # tails only need to cover the surviving piece; re-derive edges
        S = [S[i] for i in comp]
    options = []
    if comp is not None:
        g = junction_graph(S, level, p, model)
        nodes = list(range(len(S)))
        core = _complete_core(g, nodes)
        if core:
            options.append(("complete-core", [S[i] for i in core]))
        if len(core) < len(S):
            hub = _hub_blocks(g, nodes, S, params.hub_path_len, params.max_blocks)
            if hub:
                options.append(("hub-first-return", hub))
    if not options:
        # single blocks whose own repetition stays below level
        singles = []
        for b in S0:
            g = junction_graph([b], level, p, model)
            if g.has_edge(0, 0):
                singles.append(b)
        if singles:
            ctxs = sorted(singles, key=lambda b: (outer_sup(BlockAlphabet((b,), frozenset({(0, 0)})), p, model)[0], b))
            options.append(("single-block", [ctxs[0]]))
    best = None
    for method, words in options:
        try:
            B = build_block_alphabet(words, model.T)
        except GlueError:
            continue
        lo, _ = moran_bounds(BlockGeometry.from_model(B, model, c1))
        key = (lo, -len(B))
        if best is None or key > best[0]:
            best = (key, method, B, lo)
    return best


def extract_subshift(params: ExtractionParams, p, model: CantorModel) -> SubshiftCertificate:
    t = params.t
    floor = min_spectrum_estimate(p, model)
    if t <= floor:
        raise NoCertificateError(f"t = {float(t):.6g} is not above the smallest short periodic value {float(floor):.6g}")
    if params.c1 is not None:
        c1 = Fraction(params.c1)
    else:
        c1 = round_up(params.safety * distortion_constant(model, params.distortion_depth).hi)
    m0 = m0_constant(model, params.r0)
    gap = t - floor
    cands = []
    for k in params.eps_exponents:
        eps0 = gap / 2**k
        level = t - eps0
        S0 = _survivors(level, params.r0, params.depth, p, model)
        if not S0:
            continue
        best = _candidate(S0, level, p, model, params, c1)
        if best is not None:
            (_, method, B, lo) = best
            cands.append((lo, -k, method, B, eps0, level))
    if not cands:
        raise NoCertificateError("no strongly connected block graph at any trial eps0")
    # best dimension first; certification decides
    cands.sort(key=lambda x: (-x[0], x[1]))
    last_err = None
    for lo, _, method, B, eps0, level in cands:
        L = params.certify_len if params.certify_len is not None else 3 * B.max_len
        L = max(L, 3 * B.max_len)
        record, stats = [], {}
        try:
            delta, sup = certify_delta(B, t, L, p, model, record=record, stats=stats)
        except NotBelowThresholdError as err:
            last_err = err
            continue
        count, scan = stats["count"], stats["mode"]
        desc = (f"{method}: B0 = survivors of P_{params.r0} at level t - eps0, junction graph "
                f"certified by window bounds, SCC-derived block alphabet, outer sup bound over free "
                f"concatenations plus {count} cyclic block words of length <= {L} ({scan})")
        return SubshiftCertificate(B, delta, sup, lo, desc, t, L, record, count, level, eps0, params.r0, c1, m0)
    raise NoCertificateError(f"no candidate certified below t: {last_err}")
