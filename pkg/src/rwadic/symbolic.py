"""Transition systems, shift-space points and their extreme points.

Coordinates are one-indexed throughout: ``x.coordinate(1)`` is the first
symbol.  Two point representations are provided:

* :class:`ExactPoint` -- an eventually periodic sequence ``prefix + cycle^inf``;
* :class:`LazyPoint` -- a view onto a seeded stochastic stream that grows on
  demand, with an optional block of overridden leading coordinates.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import EmptyRowOrColumn, InadmissibleWord, NotPrimitive

LAZY_BLOCK = 64


# --------------------------------------------------------------------------
# transition systems


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """A topological Markov shift on symbols ``0..d-1``."""

    A: np.ndarray
    irreducible: bool
    primitive: bool
    period: int

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def __eq__(self, other):
        return isinstance(other, TransitionSystem) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())

    def __repr__(self):
        rows = ",".join("".join(str(int(v)) for v in row) for row in self.A)
        return f"TransitionSystem([{rows}], primitive={self.primitive})"

    def require_primitive(self) -> None:
        if not self.primitive:
            raise NotPrimitive(f"{self!r} is not mixing")

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not 0 <= s < self.d for s in word):
            return False
        return all(self.A[a, b] for a, b in zip(word, word[1:]))

    # predecessor-set helpers; entry -1 means "none"
    @cached_property
    def min_pred(self) -> np.ndarray:
        return np.array([int(np.flatnonzero(self.A[:, b])[0]) for b in range(self.d)])

    @cached_property
    def max_pred(self) -> np.ndarray:
        return np.array([int(np.flatnonzero(self.A[:, b])[-1]) for b in range(self.d)])

    @cached_property
    def next_larger(self) -> np.ndarray:
        """``next_larger[a, b]`` = least ``s > a`` with ``A[s, b] = 1``."""
        d = self.d
        out = np.full((d, d), -1, dtype=np.int64)
        for b in range(d):
            preds = np.flatnonzero(self.A[:, b])
            for a in range(d):
                bigger = preds[preds > a]
                if bigger.size:
                    out[a, b] = bigger[0]
        return out

    @cached_property
    def next_smaller(self) -> np.ndarray:
        """``next_smaller[a, b]`` = greatest ``s < a`` with ``A[s, b] = 1``."""
        d = self.d
        out = np.full((d, d), -1, dtype=np.int64)
        for b in range(d):
            preds = np.flatnonzero(self.A[:, b])
            for a in range(d):
                smaller = preds[preds < a]
                if smaller.size:
                    out[a, b] = smaller[-1]
        return out

    @cached_property
    def tables(self) -> tuple[list, list, list, list]:
        """Plain-list copies of (next_larger, next_smaller, min_pred, max_pred) for scalar lookups."""
        return (self.next_larger.tolist(), self.next_smaller.tolist(),
                self.min_pred.tolist(), self.max_pred.tolist())

    def phi_plus(self, b: int) -> int:
        return int(self.max_pred[b])

    def phi_minus(self, b: int) -> int:
        return int(self.min_pred[b])

    def min_fill(self, top: int, length: int) -> tuple[int, ...]:
        """The reverse-lex least admissible word of ``length`` preceding ``top``."""
        word = [0] * length
        nxt = top
        mp = self.tables[2]
        for j in range(length - 1, -1, -1):
            nxt = mp[nxt]
            word[j] = nxt
        return tuple(word)

    def max_fill(self, top: int, length: int) -> tuple[int, ...]:
        word = [0] * length
        nxt = top
        mp = self.tables[3]
        for j in range(length - 1, -1, -1):
            nxt = mp[nxt]
            word[j] = nxt
        return tuple(word)

    def words(self, length: int) -> list[tuple[int, ...]]:
        """All admissible words of the given length, in lexicographic order."""
        if length == 0:
            return [()]
        out = [(a,) for a in range(self.d)]
        for _ in range(length - 1):
            out = [w + (b,) for w in out for b in np.flatnonzero(self.A[w[-1]]).tolist()]
        return out


def _period(A: np.ndarray) -> int:
    n_comp, labels = connected_components(A, directed=True, connection="strong")
    g = 0
    for c in range(n_comp):
        nodes = np.flatnonzero(labels == c)
        sub = A[np.ix_(nodes, nodes)]
        if not sub.any():
            continue
        level = {0: 0}
        frontier = [0]
        while frontier:
            nxt = []
            for u in frontier:
                for v in np.flatnonzero(sub[u]):
                    v = int(v)
                    if v not in level:
                        level[v] = level[u] + 1
                        nxt.append(v)
            frontier = nxt
        for u in range(len(nodes)):
            for v in np.flatnonzero(sub[u]):
                g = math.gcd(g, abs(level[u] + 1 - level[int(v)]))
    return g if g else 1


def validate_tms(A) -> TransitionSystem:
    """Check a 0/1 matrix and classify the shift it defines."""
    M = np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"transition matrix must be square and nonempty, got shape {M.shape}")
    if not np.isin(M, (0, 1)).all():
        raise ValueError("transition matrix entries must be 0 or 1")
    M = M.astype(np.int64)
    for a in range(M.shape[0]):
        if not M[a].any():
            raise EmptyRowOrColumn(f"symbol {a} has no successor (row {a} is zero)")
        if not M[:, a].any():
            raise EmptyRowOrColumn(f"symbol {a} has no predecessor (column {a} is zero)")
    M.setflags(write=False)
    d = M.shape[0]
    n_comp, _ = connected_components(M, directed=True, connection="strong")
    irreducible = n_comp == 1
    primitive = False
    if irreducible:
        bound = d * d - 2 * d + 2
        B = M.astype(bool)
        P = B.copy()
        for _ in range(bound):
            if P.all():
                primitive = True
                break
            P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
    return TransitionSystem(M, irreducible, primitive, _period(M))


# --------------------------------------------------------------------------
# points


class Point(Protocol):
    def coordinate(self, n: int) -> int: ...

    def prefix_word(self, n: int) -> tuple[int, ...]: ...

    def shift(self, k: int = 1) -> "Point": ...

    def replace_prefix(self, word: Sequence[int]) -> "Point": ...


def _check_index(n: int) -> None:
    if n < 1:
        raise IndexError(f"coordinates are one-indexed, got {n}")


def _minimal_cycle(cycle: tuple[int, ...]) -> tuple[int, ...]:
    L = len(cycle)
    for p in range(1, L + 1):
        if L % p == 0 and cycle == cycle[:p] * (L // p):
            return cycle[:p]
    return cycle


@dataclass(frozen=True, slots=True)
class ExactPoint:
    """The sequence ``prefix · cycle · cycle · …`` in normalized form.

    Normalization makes the cycle primitive (not a power of a shorter word)
    and absorbs trailing prefix symbols into a rotation of the cycle, so
    structural equality coincides with equality of sequences.
    """

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        prefix = tuple(map(int, self.prefix))
        cycle = tuple(map(int, self.cycle))
        if not cycle:
            raise ValueError("cycle must be nonempty")
        if len(cycle) > 1:
            cycle = _minimal_cycle(cycle)
        if len(cycle) == 1:
            c = cycle[0]
            end = len(prefix)
            while end and prefix[end - 1] == c:
                end -= 1
            prefix = prefix[:end]
        while prefix and prefix[-1] == cycle[-1]:
            prefix = prefix[:-1]
            cycle = cycle[-1:] + cycle[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "cycle", cycle)

    @classmethod
    def _normal(cls, prefix: tuple[int, ...], cycle: tuple[int, ...]) -> "ExactPoint":
        # cycle is already primitive; only trailing prefix symbols need absorbing
        while prefix and prefix[-1] == cycle[-1]:
            prefix = prefix[:-1]
            cycle = cycle[-1:] + cycle[:-1]
        p = object.__new__(cls)
        object.__setattr__(p, "prefix", prefix)
        object.__setattr__(p, "cycle", cycle)
        return p

    @classmethod
    def periodic(cls, cycle: Sequence[int]) -> "ExactPoint":
        return cls((), tuple(cycle))

    def coordinate(self, n: int) -> int:
        _check_index(n)
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        return self.cycle[(n - 1 - len(self.prefix)) % len(self.cycle)]

    def prefix_word(self, n: int) -> tuple[int, ...]:
        p = len(self.prefix)
        if n <= p:
            return self.prefix[:n]
        c = self.cycle
        reps = (n - p) // len(c) + 1
        return self.prefix + (c * reps)[: n - p]

    def shift(self, k: int = 1) -> "ExactPoint":
        if k <= len(self.prefix):
            return ExactPoint(self.prefix[k:], self.cycle)
        r = (k - len(self.prefix)) % len(self.cycle)
        return ExactPoint((), self.cycle[r:] + self.cycle[:r])

    def replace_prefix(self, word: Sequence[int]) -> "ExactPoint":
        k = len(word)
        word = tuple(map(int, word))
        if k <= len(self.prefix):
            return ExactPoint._normal(word + self.prefix[k:], self.cycle)
        r = (k - len(self.prefix)) % len(self.cycle)
        return ExactPoint._normal(word, self.cycle[r:] + self.cycle[:r])

    @property
    def exact_horizon(self) -> int:
        """Index beyond which the point is periodic with period ``len(cycle)``."""
        return len(self.prefix)

    def is_admissible(self, ts: TransitionSystem) -> bool:
        n = len(self.prefix) + len(self.cycle) + 1
        return ts.is_admissible(self.prefix_word(n))

    def __str__(self):
        pre = "".join(map(str, self.prefix))
        cyc = "".join(map(str, self.cycle))
        return f"{pre}({cyc})^inf" if len(self.cycle) > 1 else f"{pre}{cyc}^inf"


class MarkovRule(Protocol):
    def initial(self, rng: np.random.Generator) -> int: ...

    def extend(self, rng: np.random.Generator, last: int, count: int) -> list[int]: ...


class LazySource:
    """A seeded, monotonically growing symbol stream.

    Symbols are produced in fixed blocks of :data:`LAZY_BLOCK` so that the
    value at every index depends only on the seed, not on the order or size of
    the reads that triggered growth.  Growth is guarded by a lock.
    """

    def __init__(self, rule: MarkovRule, seed, initial: Sequence[int] = ()):
        self.rule = rule
        self.seed = seed
        self._rng = np.random.default_rng(seed)
        self._buffer: list[int] = [int(s) for s in initial]
        self._lock = threading.Lock()
        if not self._buffer:
            self._buffer.append(int(rule.initial(self._rng)))

    def __len__(self):
        return len(self._buffer)

    def ensure(self, n: int) -> None:
        if n <= len(self._buffer):
            return
        with self._lock:
            while len(self._buffer) < n:
                self._buffer.extend(self.rule.extend(self._rng, self._buffer[-1], LAZY_BLOCK))

    def get(self, n: int) -> int:
        self.ensure(n)
        return self._buffer[n - 1]

    def slice(self, start: int, stop: int) -> list[int]:
        """Coordinates ``start..stop-1`` (one-indexed)."""
        self.ensure(stop - 1)
        return self._buffer[start - 1 : stop - 1]


@dataclass(frozen=True)
class LazyPoint:
    """``x_n = head[n-1]`` for ``n <= len(head)``, else ``source[n + offset]``."""

    source: LazySource
    offset: int = 0
    head: tuple[int, ...] = ()

    def coordinate(self, n: int) -> int:
        _check_index(n)
        if n <= len(self.head):
            return self.head[n - 1]
        return self.source.get(n + self.offset)

    def prefix_word(self, n: int) -> tuple[int, ...]:
        h = min(n, len(self.head))
        rest = self.source.slice(h + 1 + self.offset, n + 1 + self.offset) if n > h else []
        return self.head[:h] + tuple(rest)

    def shift(self, k: int = 1) -> "LazyPoint":
        return LazyPoint(self.source, self.offset + k, self.head[k:])

    def replace_prefix(self, word: Sequence[int]) -> "LazyPoint":
        word = tuple(int(s) for s in word)
        if len(word) >= len(self.head):
            head = word
        else:
            head = word + self.head[len(word):]
        return LazyPoint(self.source, self.offset, head)

    @property
    def exact_horizon(self) -> None:
        return None


AnyPoint = ExactPoint | LazyPoint


# --------------------------------------------------------------------------
# distances and tail relation


def agreement_index(x: AnyPoint, y: AnyPoint, cap: int = 1 << 16) -> float | int | None:
    """Least ``n`` with ``x_n != y_n``.

    Returns ``math.inf`` when equality is certified (two exact points with the
    same normal form, or two lazy views of one stream with matching
    coordinates), and ``None`` when no disagreement occurs up to ``cap`` but
    equality cannot be certified.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if isinstance(x, ExactPoint) and isinstance(y, ExactPoint):
        if x == y:
            return math.inf
        horizon = max(len(x.prefix), len(y.prefix)) + math.lcm(len(x.cycle), len(y.cycle))
        for n in range(1, horizon + 1):
            if x.coordinate(n) != y.coordinate(n):
                return n
        raise AssertionError("distinct normal forms must disagree within the horizon")
    if (
        isinstance(x, LazyPoint)
        and isinstance(y, LazyPoint)
        and x.source is y.source
        and x.offset == y.offset
    ):
        h = max(len(x.head), len(y.head))
        for n in range(1, h + 1):
            if x.coordinate(n) != y.coordinate(n):
                return n
        return math.inf
    for n in range(1, cap + 1):
        if x.coordinate(n) != y.coordinate(n):
            return n
    return None


def tail_index(x: AnyPoint, y: AnyPoint) -> int | None:
    """Least ``t >= 0`` with ``x_n = y_n`` for every ``n > t``; None if not certifiable."""
    if isinstance(x, ExactPoint) and isinstance(y, ExactPoint):
        P = max(len(x.prefix), len(y.prefix))
        L = math.lcm(len(x.cycle), len(y.cycle))
        for n in range(P + 1, P + L + 1):
            if x.coordinate(n) != y.coordinate(n):
                return None
        for n in range(P, 0, -1):
            if x.coordinate(n) != y.coordinate(n):
                return n
        return 0
    if isinstance(x, LazyPoint) and isinstance(y, LazyPoint) and x.source is y.source:
        if x.offset != y.offset:
            return None
        for n in range(max(len(x.head), len(y.head)), 0, -1):
            if x.coordinate(n) != y.coordinate(n):
                return n
        return 0
    return None


# --------------------------------------------------------------------------
# extreme points


@dataclass(frozen=True)
class ExtremePointSet:
    maximal: tuple[ExactPoint, ...]
    minimal: tuple[ExactPoint, ...]
    phi_plus: tuple[int, ...]
    phi_minus: tuple[int, ...]

    def is_maximal(self, x: AnyPoint) -> bool:
        return any(agreement_index(x, w) == math.inf for w in self.maximal)

    def is_minimal(self, x: AnyPoint) -> bool:
        return any(agreement_index(x, w) == math.inf for w in self.minimal)


def _functional_cycles(phi: Sequence[int]) -> list[list[int]]:
    seen: set[int] = set()
    cycles = []
    for start in range(len(phi)):
        path, pos = [], {}
        s = start
        while s not in pos and s not in seen:
            pos[s] = len(path)
            path.append(s)
            s = phi[s]
        if s in pos:
            cycles.append(path[pos[s]:])
        seen.update(path)
    return cycles


def _cycle_points(phi: Sequence[int]) -> tuple[ExactPoint, ...]:
    # x_n = phi(x_{n+1}): reading a phi-cycle t -> phi(t) -> ... backwards
    pts = []
    for cyc in _functional_cycles(phi):
        word = tuple(reversed(cyc))
        for r in range(len(word)):
            pts.append(ExactPoint.periodic(word[r:] + word[:r]))
    return tuple(sorted(set(pts), key=lambda p: p.cycle))


def extreme_points(ts: TransitionSystem) -> ExtremePointSet:
    phi_plus = tuple(int(v) for v in ts.max_pred)
    phi_minus = tuple(int(v) for v in ts.min_pred)
    return ExtremePointSet(_cycle_points(phi_plus), _cycle_points(phi_minus), phi_plus, phi_minus)


def in_sigma_prime(ts: TransitionSystem, x: ExactPoint) -> bool:
    """Membership in the complement of all shift-preimages of extreme points.

    Only exact points can be decided; every shift of ``x`` is checked.
    """
    ext = extreme_points(ts)
    for k in range(len(x.prefix) + len(x.cycle) + 1):
        s = x.shift(k)
        if ext.is_maximal(s) or ext.is_minimal(s):
            return False
    return True


# --------------------------------------------------------------------------
# compact representation


def _orbit(phi: Sequence[int], s: int) -> tuple[list[int], int, int]:
    """Orbit list of ``s`` under ``phi`` up to the first repeat, transient, period."""
    orbit, pos = [], {}
    while s not in pos:
        pos[s] = len(orbit)
        orbit.append(s)
        s = phi[s]
    return orbit, pos[s], len(orbit) - pos[s]


def compact_successor_sets(ts: TransitionSystem) -> dict[ExactPoint, frozenset[ExactPoint]]:
    """Limit points of ``tau(x)`` as ``x`` approaches each maximal point.

    A point close to the maximal point ``w`` whose carry happens at depth
    ``m`` reads ``x_j = phi_plus^(m-j)(a)`` below ``m`` (with ``a = x_m``), so
    ``a``'s phi_plus orbit must eventually run along ``w`` in phase.  The image
    reads ``phi_minus^(m-j)(s)`` below ``m`` with ``s = next_larger[a, x_{m+1}]``;
    each residue of ``m`` gives one phase of the phi_minus cycle reached from
    ``s``.
    """
    ts.require_primitive()
    ext = extreme_points(ts)
    phi_p, phi_m = ext.phi_plus, ext.phi_minus
    out = {}
    for w in ext.maximal:
        kp = len(w.cycle)
        limits = set()
        for a in range(ts.d):
            porb, ptr, pper = _orbit(phi_p, a)
            for t in range(ts.d):
                if not ts.A[a, t] or ts.next_larger[a, t] < 0:
                    continue
                s = int(ts.next_larger[a, t])
                morb, mtr, km = _orbit(phi_m, s)
                L = math.lcm(kp, km, pper)
                base = L * (ptr + mtr + kp + km + 2)
                for rho in range(L):
                    m = base + rho
                    # x_{m-k} = phi_plus^k(a) must match w for all large k
                    if any(
                        orbit_at(porb, ptr, pper, k) != w.coordinate(m - k)
                        for k in range(ptr, ptr + pper * kp)
                    ):
                        continue
                    coords = tuple(orbit_at(morb, mtr, km, m - j) for j in range(1, km + 1))
                    limits.add(ExactPoint.periodic(coords))
        out[w] = frozenset(limits)
    return out


def orbit_at(orbit: list[int], transient: int, period: int, k: int) -> int:
    """``phi^k(s)`` given the orbit list of ``s`` under phi."""
    if k < len(orbit):
        return orbit[k]
    return orbit[transient + (k - transient) % period]


def generic_cycle(ts: TransitionSystem, max_period: int = 12) -> tuple[int, ...]:
    """Shortest periodic word whose point is neither extreme nor a shift-preimage of one."""
    for n in range(1, max_period + 1):
        for w in ts.words(n):
            if ts.A[w[-1], w[0]] and len(_minimal_cycle(w)) == n and in_sigma_prime(ts, ExactPoint.periodic(w)):
                return w
    raise ValueError(f"no generic periodic point of period <= {max_period}")


def extend_to_cycle(ts: TransitionSystem, word: Sequence[int], cycle: Sequence[int]) -> ExactPoint:
    """An admissible point ``word . path . cycle^inf`` using a shortest connecting path."""
    word, cycle = tuple(int(s) for s in word), tuple(int(s) for s in cycle)
    if not ts.is_admissible(word) or not ts.is_admissible(cycle + cycle[:1]):
        raise InadmissibleWord(f"{word} or the cycle {cycle} is not admissible")
    targets = {c: i for i, c in enumerate(cycle)}
    if not word:
        return ExactPoint.periodic(cycle)
    prev = {word[-1]: None}
    frontier = [word[-1]]
    hit = None
    while frontier and hit is None:
        nxt = []
        for a in frontier:
            for b in np.flatnonzero(ts.A[a]).tolist():
                if b in targets:
                    hit = (a, b)
                    break
                if b not in prev:
                    prev[b] = a
                    nxt.append(b)
            if hit:
                break
        frontier = nxt
    if hit is None:
        raise InadmissibleWord(f"cycle {cycle} cannot follow {word}")
    a, b = hit
    path = []
    while a is not None and a != word[-1]:
        path.append(a)
        a = prev[a]
    path.reverse()
    i = targets[b]
    return ExactPoint(word + tuple(path), cycle[i:] + cycle[:i])
