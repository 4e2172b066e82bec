"""Locally constant group-valued cocycles and the skew products they drive.

A cocycle of range ``r`` is a table on admissible ``r``-words with values in
``G = Z^k x R^(D-k)``.  Group elements keep their lattice part as Python
integers; anything that leaves the signed 64-bit range raises
:class:`IntegerOverflow`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import adic
from .errors import IntegerOverflow, MaximalPoint, NotTailEquivalent, PeriodBudgetExceeded
from .lattice import hermite_basis, is_full_lattice
from .measures import Measures
from .symbolic import AnyPoint, TransitionSystem, tail_index

INT64_MAX = 2**63 - 1
MAX_PERIOD = 12


@dataclass(frozen=True)
class GroupSpec:
    k: int
    D: int

    def __post_init__(self):
        if not 0 <= self.k <= self.D:
            raise ValueError(f"need 0 <= k <= D, got k={self.k}, D={self.D}")

    def zero(self) -> "GroupElement":
        return GroupElement((0,) * self.k, (0.0,) * (self.D - self.k))

    def element(self, values: Sequence[float]) -> "GroupElement":
        if len(values) != self.D:
            raise ValueError(f"expected {self.D} coordinates, got {len(values)}")
        lat = []
        for v in values[: self.k]:
            if float(v) != int(v):
                raise ValueError(f"lattice coordinate {v!r} is not an integer")
            lat.append(int(v))
        return GroupElement(tuple(lat), tuple(float(v) for v in values[self.k :]))


@dataclass(frozen=True)
class GroupElement:
    lattice: tuple[int, ...]
    real: tuple[float, ...]

    def __post_init__(self):
        for v in self.lattice:
            if not -INT64_MAX - 1 <= v <= INT64_MAX:
                raise IntegerOverflow(f"lattice coordinate {v} outside 64-bit range")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            tuple(a + b for a, b in zip(self.lattice, other.lattice)),
            tuple(a + b for a, b in zip(self.real, other.real)),
        )

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __neg__(self) -> "GroupElement":
        return GroupElement(tuple(-a for a in self.lattice), tuple(-a for a in self.real))

    def as_vector(self) -> np.ndarray:
        return np.array(list(self.lattice) + list(self.real), dtype=float)

    def is_zero(self) -> bool:
        return not any(self.lattice) and not any(self.real)


class Cocycle:
    """A function of the first ``r`` coordinates with values in ``G``."""

    def __init__(self, ts: TransitionSystem, r: int, group: GroupSpec, table: Mapping[Sequence[int], Sequence[float]], measures: Measures | None = None):
        if r < 1:
            raise ValueError("range must be >= 1")
        self.ts = ts
        self.r = r
        self.group = group
        self.words = ts.words(r)
        missing = [w for w in self.words if tuple(w) not in {tuple(k) for k in table}]
        if missing:
            raise ValueError(f"cocycle table has no entry for admissible words {missing[:5]}")
        norm = {tuple(k): v for k, v in table.items()}
        extra = [w for w in norm if w not in set(self.words)]
        if extra:
            raise ValueError(f"cocycle table has entries for inadmissible words {extra[:5]}")
        self.table = {w: group.element(norm[w]) for w in self.words}
        self._measures = measures

    @property
    def measures(self) -> Measures:
        if self._measures is None:
            self._measures = Measures(self.ts)
        return self._measures

    @property
    def D(self) -> int:
        return self.group.D

    def __call__(self, x: AnyPoint) -> GroupElement:
        return self.table[x.prefix_word(self.r)]

    def value(self, word: Sequence[int]) -> GroupElement:
        return self.table[tuple(word)]

    @cached_property
    def matrix(self) -> np.ndarray:
        """Values as a float array, rows ordered like ``self.words``."""
        return np.array([self.table[w].as_vector() for w in self.words]).reshape(len(self.words), self.D)

    @cached_property
    def mean(self) -> np.ndarray:
        """``E_mu(f)``, summed over the mu-masses of the ``r``-words."""
        weights = np.array([self.measures.mu_cylinder(w) for w in self.words])
        return weights @ self.matrix

    @cached_property
    def centered(self) -> np.ndarray:
        return self.matrix - self.mean[None, :]

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.matrix).max()) if self.matrix.size else 0.0

    def code_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Lattice and real value tables indexed by the base-``d`` code of an ``r``-word."""
        d, k = self.ts.d, self.group.k
        lat = np.zeros((d**self.r, k), dtype=np.int64)
        real = np.zeros((d**self.r, self.D - k), dtype=np.float64)
        for w in self.words:
            code = 0
            for s in w:
                code = code * d + s
            lat[code] = self.table[w].lattice
            real[code] = self.table[w].real
        return lat, real


def _window_sum(f: Cocycle, word: Sequence[int], count: int) -> GroupElement:
    lat = [0] * f.group.k
    real = [0.0] * (f.D - f.group.k)
    for k in range(count):
        g = f.table[tuple(word[k : k + f.r])]
        for i, v in enumerate(g.lattice):
            lat[i] += v
        for i, v in enumerate(g.real):
            real[i] += v
    return GroupElement(tuple(lat), tuple(real))


def birkhoff_sum(f: Cocycle, x: AnyPoint, n: int) -> GroupElement:
    """``f_n(x) = sum_{k<n} f(sigma^k x)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return f.group.zero()
    return _window_sum(f, x.prefix_word(n + f.r - 1), n)


def centered_sum(f: Cocycle, x: AnyPoint, n: int) -> np.ndarray:
    """``f_n(x) - n E(f)`` as a real vector."""
    return birkhoff_sum(f, x, n).as_vector() - n * f.mean


def psi(f: Cocycle, x: AnyPoint, y: AnyPoint) -> GroupElement:
    """``sum_k f(sigma^k y) - f(sigma^k x)`` for tail-equivalent ``x, y``.

    Windows starting after the last disagreement cancel, so the sum is
    ``f_t(y) - f_t(x)`` with ``t`` the tail index.
    """
    t = tail_index(x, y)
    if t is None:
        raise NotTailEquivalent("points are not certifiably tail equivalent")
    return birkhoff_sum(f, y, t) - birkhoff_sum(f, x, t)


def phi(f: Cocycle, x: AnyPoint) -> GroupElement:
    """Displacement of the adic skew product: ``psi(x, tau x)``."""
    c = adic.carry_depth(f.ts, x)
    if c is None:
        raise MaximalPoint(f"{x} is maximal")
    y = adic.successor(f.ts, x)
    return birkhoff_sum(f, y, c) - birkhoff_sum(f, x, c)


@dataclass(frozen=True)
class SkewState:
    base: AnyPoint
    position: GroupElement


def skew_step(f: Cocycle, s: SkewState) -> SkewState:
    """``T(x, y) = (tau x, y + phi(x))``."""
    return SkewState(adic.successor(f.ts, s.base), s.position + phi(f, s.base))


def skew_orbit(f: Cocycle, s: SkewState, n: int) -> list[SkewState]:
    out = [s]
    for _ in range(n):
        s = skew_step(f, s)
        out.append(s)
    return out


def shift_skew_step(f: Cocycle, s: SkewState) -> SkewState:
    """``sigma_f(x, y) = (sigma x, y + f(x))``."""
    return SkewState(s.base.shift(1), s.position + f(s.base))


# --------------------------------------------------------------------------
# group generated by periodic orbits


@dataclass(frozen=True)
class GroupSpan:
    H_basis: list[tuple[int, ...]]
    G_basis: list[tuple[int, ...]]
    H_real_rank: int
    G_real_rank: int
    degree: int
    full_rank: bool
    max_period: int
    generator_count: int


def periodic_words(ts: TransitionSystem, n: int) -> list[tuple[int, ...]]:
    """Words ``w`` of length ``n`` with ``w^inf`` admissible."""
    return [w for w in ts.words(n) if ts.A[w[-1], w[0]]]


def periodic_sum(f: Cocycle, w: Sequence[int]) -> GroupElement:
    n = len(w)
    reps = -(-(n + f.r - 1) // n)
    return _window_sum(f, tuple(w) * reps, n)


def group_span(f: Cocycle, max_period: int | None = None) -> GroupSpan:
    """Generators of H (periodic sums) and G (differences at equal period)."""
    P = f.ts.d if max_period is None else max_period
    if P > MAX_PERIOD:
        raise PeriodBudgetExceeded(f"max_period {P} exceeds {MAX_PERIOD}")
    k = f.group.k
    H_gens, G_gens = set(), set()
    for n in range(1, P + 1):
        sums = {periodic_sum(f, w) for w in periodic_words(f.ts, n)}
        sums = sorted(sums, key=lambda g: (g.lattice, g.real))
        if not sums:
            continue
        ref = sums[0]
        for g in sums:
            H_gens.add(g)
            G_gens.add(g - ref)
    H_mat = np.array([g.as_vector() for g in H_gens]).reshape(-1, f.D)
    G_mat = np.array([g.as_vector() for g in G_gens]).reshape(-1, f.D)
    H_basis = hermite_basis([g.lattice for g in H_gens], k) if k else []
    G_basis = hermite_basis([g.lattice for g in G_gens], k) if k else []
    H_real_rank = int(np.linalg.matrix_rank(H_mat[:, k:])) if f.D > k and len(H_mat) else 0
    G_real_rank = int(np.linalg.matrix_rank(G_mat[:, k:])) if f.D > k and len(G_mat) else 0
    degree = int(np.linalg.matrix_rank(G_mat)) if len(G_mat) and f.D else 0
    full = is_full_lattice(G_basis, k) and G_real_rank == f.D - k
    return GroupSpan(H_basis, G_basis, H_real_rank, G_real_rank, degree, full, P, len(G_gens))


# --------------------------------------------------------------------------
# exchangeability


def exchangeability_cocycle(ts: TransitionSystem, measures: Measures | None = None) -> Cocycle:
    """Occurrence indicator of symbols ``1..d-1`` in the first coordinate."""
    ts.require_primitive()
    d = ts.d
    table = {(a,): [1 if a == j else 0 for j in range(1, d)] for a in range(d)}
    return Cocycle(ts, 1, GroupSpec(d - 1, d - 1), table, measures)


def almost_onto(ts: TransitionSystem) -> bool:
    """Symbols linked when they share a successor; true iff the link graph is connected."""
    ts.require_primitive()
    d = ts.d
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for b, c in itertools.combinations(range(d), 2):
        if np.any(ts.A[b] & ts.A[c]):
            parent[find(b)] = find(c)
    return len({find(i) for i in range(d)}) == 1
