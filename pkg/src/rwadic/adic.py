"""The adic (Vershik) map on a stationary Markov shift.

``successor`` is the next point of the tail class in reverse lexicographic
order; ``predecessor`` is its inverse.  Fibers ``sigma^-n{sigma^n x}`` are
enumerated explicitly for small ``n`` and ranked by counting for any ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DepthTooLarge, MaximalPoint, MinimalPoint
from .symbolic import (
    AnyPoint,
    ExactPoint,
    LazyPoint,
    LazySource,
    TransitionSystem,
    extreme_points,
)

DEFAULT_FIBER_CAP = 24
LAZY_SEARCH_LIMIT = 1 << 20


def _search_limit(x: AnyPoint) -> int:
    if isinstance(x, ExactPoint):
        return len(x.prefix) + len(x.cycle) + 1
    return LAZY_SEARCH_LIMIT


def carry_depth(ts: TransitionSystem, x: AnyPoint) -> int | None:
    """Least ``n`` at which ``x_n`` can be raised given ``x_{n+1}``; None if maximal."""
    move = _first_move(ts.tables[0], x)
    return None if move is None else move[0]


def _first_move(table: list, x: AnyPoint) -> tuple[int, int] | None:
    """Least ``n`` where ``table`` offers a replacement for ``x_n``, with that symbol."""
    limit = _search_limit(x)
    if isinstance(x, ExactPoint):
        w = x.prefix_word(limit + 1)
        for n in range(1, limit + 1):
            s = table[w[n - 1]][w[n]]
            if s >= 0:
                return n, s
        return None
    for n in range(1, limit + 1):
        s = table[x.coordinate(n)][x.coordinate(n + 1)]
        if s >= 0:
            return n, s
    return None


def borrow_depth(ts: TransitionSystem, x: AnyPoint) -> int | None:
    move = _first_move(ts.tables[1], x)
    return None if move is None else move[0]


def successor(ts: TransitionSystem, x: AnyPoint) -> AnyPoint:
    move = _first_move(ts.tables[0], x)
    if move is None:
        raise MaximalPoint(f"{x} is maximal")
    n, s = move
    return x.replace_prefix(ts.min_fill(s, n - 1) + (s,))


def predecessor(ts: TransitionSystem, x: AnyPoint) -> AnyPoint:
    move = _first_move(ts.tables[1], x)
    if move is None:
        raise MinimalPoint(f"{x} is minimal")
    n, s = move
    return x.replace_prefix(ts.max_fill(s, n - 1) + (s,))


def iterate(ts: TransitionSystem, x: AnyPoint, k: int) -> AnyPoint:
    step = successor if k >= 0 else predecessor
    for _ in range(abs(k)):
        x = step(ts, x)
    return x


def precedes(x_word: Sequence[int], y_word: Sequence[int]) -> bool:
    """Reverse lexicographic comparison of equal-length words: decided at the last difference."""
    for a, b in zip(reversed(x_word), reversed(y_word)):
        if a != b:
            return a < b
    return False


# --------------------------------------------------------------------------
# counting


def _column_counts(ts: TransitionSystem, n: int) -> list[list[int]]:
    """``counts[j][a]`` = number of admissible words of length ``j`` that can precede ``a``."""
    A = [[int(v) for v in row] for row in ts.A]
    d = ts.d
    counts = [[1] * d]
    for _ in range(n):
        prev = counts[-1]
        counts.append([sum(prev[u] * A[u][a] for u in range(d)) for a in range(d)])
    return counts


def fiber_size(ts: TransitionSystem, s: int, n: int) -> int:
    """Number of admissible words of length ``n`` that can precede the symbol ``s``."""
    return _column_counts(ts, n)[n][s]


def fiber_rank(ts: TransitionSystem, x: AnyPoint, n: int) -> int:
    """Position of ``x_1..x_n`` in its fiber, counted without enumeration."""
    counts = _column_counts(ts, n)
    word = x.prefix_word(n + 1)
    rank = 0
    for j in range(n, 0, -1):
        nxt = word[j]
        for a in range(word[j - 1]):
            if ts.A[a, nxt]:
                rank += counts[j - 1][a]
    return rank


# --------------------------------------------------------------------------
# fibers


@dataclass(frozen=True)
class FiberView:
    base: AnyPoint
    depth: int
    elements: tuple[tuple[int, ...], ...]
    rank: int

    def __len__(self):
        return len(self.elements)

    def points(self) -> list[AnyPoint]:
        return [self.base.replace_prefix(w) for w in self.elements]


def fiber_words(ts: TransitionSystem, top: int, n: int) -> list[tuple[int, ...]]:
    """All admissible length-``n`` words ``w`` with ``A[w_n, top] = 1``, reverse-lex sorted."""
    words = [()]
    nxt_syms = [top]
    for _ in range(n):
        new_words, new_syms = [], []
        for w, t in zip(words, nxt_syms):
            for a in np.flatnonzero(ts.A[:, t]).tolist():
                new_words.append((a,) + w)
                new_syms.append(a)
        words, nxt_syms = new_words, new_syms
    return sorted(words, key=lambda w: w[::-1])


def fiber(ts: TransitionSystem, x: AnyPoint, n: int, cap: int = DEFAULT_FIBER_CAP) -> FiberView:
    if n < 1:
        raise ValueError("fiber depth must be >= 1")
    if n > cap:
        raise DepthTooLarge(f"fiber depth {n} exceeds cap {cap}")
    words = fiber_words(ts, x.coordinate(n + 1), n)
    own = x.prefix_word(n)
    return FiberView(x, n, tuple(words), words.index(own))


def is_n_minimal(ts: TransitionSystem, x: AnyPoint, n: int) -> bool:
    return x.prefix_word(n) == ts.min_fill(x.coordinate(n + 1), n)


def is_n_maximal(ts: TransitionSystem, x: AnyPoint, n: int) -> bool:
    return x.prefix_word(n) == ts.max_fill(x.coordinate(n + 1), n)


@dataclass(frozen=True)
class BlockQuantities:
    K: int
    fiber_size: int
    rank: int
    is_n_minimal: bool
    is_n_maximal: bool
    tau_n: AnyPoint


def next_fiber_start(ts: TransitionSystem, x: AnyPoint, n: int) -> AnyPoint:
    """The n-minimal point ``z`` with ``sigma^n z = tau(sigma^n x)``."""
    tail = x.shift(n)
    c = carry_depth(ts, tail)
    if c is None:
        raise MaximalPoint(f"sigma^{n} x is maximal")
    y = successor(ts, tail)
    new_tail = y.prefix_word(c)
    return x.replace_prefix(ts.min_fill(new_tail[0], n) + new_tail)


def block_quantities(ts: TransitionSystem, x: AnyPoint, n: int) -> BlockQuantities:
    """Fiber position data at depth ``n``.

    ``K`` is the number of adic steps from ``x`` to the n-maximal point of its
    fiber (0 when ``x`` is itself n-maximal).  ``tau_n`` is the first point of
    the following fiber, reached after ``K + 1`` steps.
    """
    size = fiber_size(ts, x.coordinate(n + 1), n)
    rank = fiber_rank(ts, x, n)
    return BlockQuantities(
        K=size - 1 - rank,
        fiber_size=size,
        rank=rank,
        is_n_minimal=rank == 0,
        is_n_maximal=rank == size - 1,
        tau_n=next_fiber_start(ts, x, n),
    )


def block_length(ts: TransitionSystem, x: AnyPoint, n: int, r: int) -> int:
    """``K(x) + sum_{j=1}^{r-1} #fiber(tau^j sigma^n x)``.

    This is the step count from ``x`` to the n-maximal point of the
    ``(r-1)``-th following fiber.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    total = block_quantities(ts, x, n).K
    z = x.shift(n)
    for _ in range(1, r):
        z = successor(ts, z)
        total += fiber_size(ts, z.coordinate(1), n)
    return total


def block_length_by_iteration(ts: TransitionSystem, x: AnyPoint, n: int, r: int) -> int:
    """Direct-iteration oracle for :func:`block_length`."""
    seen = 0
    k = 0
    y = x
    while True:
        if is_n_maximal(ts, y, n):
            seen += 1
            if seen == r:
                return k
        y = successor(ts, y)
        k += 1


# --------------------------------------------------------------------------
# approach oracle for the compact representation


class UniformRule:
    """Uniform choice among admissible successors; full support on every cylinder."""

    def __init__(self, ts: TransitionSystem):
        self.succ = [np.flatnonzero(ts.A[a]) for a in range(ts.d)]
        self.d = ts.d

    def initial(self, rng):
        return int(rng.integers(self.d))

    def extend(self, rng, last, count):
        out = []
        u = rng.random(count)
        for v in u:
            opts = self.succ[last]
            last = int(opts[int(v * len(opts))])
            out.append(last)
        return out


def approach_limits(
    ts: TransitionSystem,
    omega: ExactPoint,
    samples: int = 100,
    depth_range: tuple[int, int] = (100, 1000),
    match_depth: int = 40,
    seed: int = 0,
) -> set[ExactPoint]:
    """Randomized estimate of the limit set of ``tau(x)`` for ``x -> omega``.

    Each sample agrees with ``omega`` to a random depth and continues with a
    random admissible tail; the image under the adic map is matched against
    the minimal points to ``match_depth`` coordinates.  A sample matching no
    minimal point is reported as a ``ValueError``.
    """
    minimal = extreme_points(ts).minimal
    rule = UniformRule(ts)
    rng = np.random.default_rng(seed)
    found = set()
    for i in range(samples):
        m = int(rng.integers(depth_range[0], depth_range[1] + 1))
        src = LazySource(rule, [seed, i], initial=omega.prefix_word(m))
        y = successor(ts, LazyPoint(src))
        head = y.prefix_word(match_depth)
        hits = [a for a in minimal if a.prefix_word(match_depth) == head]
        if not hits:
            raise ValueError(f"image of approach sample {i} matches no minimal point")
        found.update(hits)
    return found
