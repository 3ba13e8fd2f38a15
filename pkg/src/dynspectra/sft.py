"""Alphabets, transition relations and admissible words for 1-step SFTs.

Letters are dense integer indices 0..k-1 and words are plain tuples of
ints, so hot loops never touch labels or wrapper objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

Word = tuple  # tuple[int, ...]


class JunctionError(ValueError):
    """Raised when two words cannot be concatenated."""

    def __init__(self, pair):
        self.pair = tuple(pair)
        super().__init__(f"junction {self.pair} is not an allowed transition")


class GlueError(ValueError):
    """Raised when a block alphabet has inadmissible ordered pairs."""

    def __init__(self, bad_pairs):
        self.bad_pairs = list(bad_pairs)
        super().__init__(f"block glue fails on {len(self.bad_pairs)} ordered pairs: {self.bad_pairs}")


class TransitionError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionSet:
    """Allowed ordered letter pairs over the alphabet {0, ..., size-1}."""

    size: int
    allowed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.size < 1:
            raise TransitionError("alphabet size must be >= 1")
        allowed = frozenset((int(a), int(b)) for a, b in self.allowed)
        for a, b in allowed:
            if not (0 <= a < self.size and 0 <= b < self.size):
                raise TransitionError(f"pair {(a, b)} uses a letter outside 0..{self.size - 1}")
        object.__setattr__(self, "allowed", allowed)
        # successor table, used by every DFS
        succ = tuple(tuple(b for b in range(self.size) if (a, b) in allowed) for a in range(self.size))
        object.__setattr__(self, "_succ", succ)

    @classmethod
    def full(cls, size: int) -> "TransitionSet":
        return cls(size, frozenset((a, b) for a in range(size) for b in range(size)))

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[Sequence[int]]) -> "TransitionSet":
        return cls(size, frozenset((int(a), int(b)) for a, b in pairs))

    @property
    def letters(self) -> range:
        return range(self.size)

    def successors(self, a: int) -> tuple:
        return self._succ[a]

    def predecessors(self, b: int) -> tuple:
        return tuple(a for a in range(self.size) if (a, b) in self.allowed)

    def allows(self, a: int, b: int) -> bool:
        return (a, b) in self.allowed

    def is_full(self) -> bool:
        return len(self.allowed) == self.size * self.size

    def reversed(self) -> "TransitionSet":
        return TransitionSet(self.size, frozenset((b, a) for a, b in self.allowed))

    def is_symmetric(self) -> bool:
        return all((b, a) in self.allowed for a, b in self.allowed)

    def dead_letters(self) -> list:
        srcs = {a for a, _ in self.allowed}
        tgts = {b for _, b in self.allowed}
        return [x for x in range(self.size) if x not in srcs or x not in tgts]

    def is_mixing(self) -> bool:
        """Strongly connected and aperiodic (period of the graph is 1)."""
        import networkx as nx

        g = nx.DiGraph()
        g.add_nodes_from(range(self.size))
        g.add_edges_from(self.allowed)
        if not self.allowed or not nx.is_strongly_connected(g):
            return False
        return nx.is_aperiodic(g)

    def validate(self, mixing: bool = False) -> None:
        dead = self.dead_letters()
        if dead:
            raise TransitionError(f"dead letters (missing as source or target): {dead}")
        if mixing and not self.is_mixing():
            raise TransitionError("transition graph declared mixing but is not strongly connected and aperiodic")


@dataclass(frozen=True)
class PeriodicPoint:
    """The bi-infinite repetition of period_word, read from position phase."""

    period_word: Word
    phase: int = 0

    def __post_init__(self):
        w = tuple(self.period_word)
        if not w:
            raise ValueError("period word must be nonempty")
        if not 0 <= self.phase < len(w):
            raise ValueError("phase out of range")
        object.__setattr__(self, "period_word", w)

    def check(self, T: TransitionSet) -> None:
        w = self.period_word
        if not is_admissible(w, T):
            raise JunctionError(_first_bad_pair(w, T))
        if not T.allows(w[-1], w[0]):
            raise JunctionError((w[-1], w[0]))

    def rotated(self) -> Word:
        w = self.period_word
        return w[self.phase:] + w[: self.phase]


@dataclass(frozen=True)
class BlockAlphabet:
    """A block list plus the verified glue table (all ordered pairs admissible)."""

    blocks: tuple
    glue: frozenset

    def __len__(self):
        return len(self.blocks)

    @property
    def max_len(self) -> int:
        return max(len(b) for b in self.blocks)

    @property
    def min_len(self) -> int:
        return min(len(b) for b in self.blocks)

    def word(self, indices: Sequence[int]) -> Word:
        out = ()
        for i in indices:
            out += self.blocks[i]
        return out


def _first_bad_pair(w, T):
    for a, b in zip(w, w[1:]):
        if (a, b) not in T.allowed:
            return (a, b)
    return None


def is_admissible(w: Sequence[int], T: TransitionSet) -> bool:
    allowed = T.allowed
    for i in range(len(w) - 1):
        if (w[i], w[i + 1]) not in allowed:
            return False
    return True


def concat(w1: Sequence[int], w2: Sequence[int], T: TransitionSet) -> Word:
    w1, w2 = tuple(w1), tuple(w2)
    if w1 and w2 and (w1[-1], w2[0]) not in T.allowed:
        raise JunctionError((w1[-1], w2[0]))
    return w1 + w2


def transpose(w: Sequence[int]) -> Word:
    return tuple(reversed(tuple(w)))


def enumerate_admissible(
    T: TransitionSet,
    accept: Callable[[Word], bool],
    extend: Callable[[Word], bool],
    first_letters: Iterable[int] | None = None,
) -> Iterator[Word]:
    """Lexicographic preorder DFS over admissible words.

    A word is emitted when accept(w) holds; its children are explored only
    when extend(w) holds. extend must be monotone (once false, false on all
    extensions) or the pruning drops words.
    """
    roots = range(T.size) if first_letters is None else first_letters
    for a in roots:
        stack = [(a,)]
        while stack:
            w = stack.pop()
            if accept(w):
                yield w
            if extend(w):
                # push in reverse so the smallest letter pops first
                for b in reversed(T.successors(w[-1])):
                    stack.append(w + (b,))


def build_block_alphabet(blocks: Iterable[Sequence[int]], T: TransitionSet) -> BlockAlphabet:
    blocks = tuple(tuple(b) for b in blocks)
    if not blocks:
        raise ValueError("block alphabet must be nonempty")
    for b in blocks:
        if not b:
            raise ValueError("blocks must be nonempty words")
        if not is_admissible(b, T):
            raise JunctionError(_first_bad_pair(b, T))
    glue, bad = set(), []
    for i, bi in enumerate(blocks):
        for j, bj in enumerate(blocks):
            if (bi[-1], bj[0]) in T.allowed:
                glue.add((i, j))
            else:
                bad.append((bi, bj))
    if bad:
        raise GlueError(bad)
    return BlockAlphabet(blocks, frozenset(glue))
