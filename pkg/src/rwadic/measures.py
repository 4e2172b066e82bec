"""Perron data, the Parry measure, the tail-invariant measure and nu-sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InadmissibleWord, NoConvergence
from .symbolic import LazyPoint, LazySource, TransitionSystem

POWER_TOL = 1e-14
POWER_BUDGET = 10**6


@dataclass(frozen=True)
class PerronData:
    lam: float
    u: np.ndarray  # left eigenvector, u A = lam u
    v: np.ndarray  # right eigenvector, A v = lam v
    residual_left: float
    residual_right: float
    iterations: int

    @property
    def sum_v(self) -> float:
        return float(self.v.sum())

    @property
    def uv(self) -> float:
        return float(self.u @ self.v)


def _power(M: np.ndarray) -> tuple[float, np.ndarray, int]:
    d = M.shape[0]
    x = np.full(d, 1.0 / d)
    # shifting by the identity keeps the spectrum's leading term simple and
    # speeds up convergence for nearly periodic matrices
    S = M + np.eye(d)
    for it in range(1, POWER_BUDGET + 1):
        y = S @ x
        y /= y.sum()
        if np.max(np.abs(y - x)) < POWER_TOL:
            x = y
            break
        x = y
    else:
        raise NoConvergence(f"power iteration did not converge in {POWER_BUDGET} steps")
    lam = float((M @ x).sum() / x.sum())
    return lam, x / x.min(), it


def perron(ts: TransitionSystem) -> PerronData:
    """Leading eigenvalue and positive eigenvectors, normalized to minimum entry 1."""
    ts.require_primitive()
    A = ts.A.astype(float)
    lam_r, v, it_r = _power(A)
    lam_l, u, it_l = _power(A.T)
    lam = 0.5 * (lam_r + lam_l)
    return PerronData(
        lam=lam,
        u=u,
        v=v,
        residual_left=float(np.max(np.abs(u @ A - lam * u))),
        residual_right=float(np.max(np.abs(A @ v - lam * v))),
        iterations=max(it_r, it_l),
    )


class NuRule:
    """Markov extension rule for the tail-invariant measure."""

    def __init__(self, initial: np.ndarray, P: np.ndarray):
        self.init_cdf = np.cumsum(initial)
        self.init_cdf[-1] = 1.0
        self.cdf = np.cumsum(P, axis=1)
        self.cdf[:, -1] = 1.0

    def initial(self, rng):
        return int(np.searchsorted(self.init_cdf, rng.random(), side="right"))

    def extend(self, rng, last, count):
        out = []
        for u in rng.random(count):
            last = int(np.searchsorted(self.cdf[last], u, side="right"))
            out.append(last)
        return out


class Measures:
    """Parry measure ``mu`` and tail-invariant measure ``nu`` of a mixing shift.

    Both are Markov with transitions ``P[a, b] = A[a, b] v_b / (lam v_a)``;
    ``mu`` starts from ``u_a v_a / <u, v>`` and ``nu`` from ``v_a / sum(v)``.
    """

    def __init__(self, ts: TransitionSystem, perron_data: PerronData | None = None):
        self.ts = ts
        self.perron = perron_data or perron(ts)

    @property
    def lam(self) -> float:
        return self.perron.lam

    @cached_property
    def P(self) -> np.ndarray:
        p = self.perron
        return self.ts.A * p.v[None, :] / (p.lam * p.v[:, None])

    @cached_property
    def pi(self) -> np.ndarray:
        """Initial law of ``nu``."""
        return self.perron.v / self.perron.sum_v

    @cached_property
    def stationary(self) -> np.ndarray:
        """One-symbol marginal of ``mu``."""
        p = self.perron
        return p.u * p.v / p.uv

    def _check(self, w: Sequence[int]) -> None:
        if len(w) == 0:
            raise InadmissibleWord("empty word")
        if not self.ts.is_admissible(w):
            raise InadmissibleWord(f"{tuple(w)} is not admissible")

    def mu_cylinder(self, w: Sequence[int]) -> float:
        self._check(w)
        p = self.perron
        return float(p.u[w[0]] * p.v[w[-1]] / (p.lam ** (len(w) - 1) * p.uv))

    def nu_cylinder(self, w: Sequence[int]) -> float:
        self._check(w)
        p = self.perron
        return float(p.v[w[-1]] / (p.lam ** (len(w) - 1) * p.sum_v))

    def density_h(self, a: int) -> float:
        """Radon-Nikodym derivative d(mu)/d(nu), a function of the first symbol."""
        p = self.perron
        return float(p.u[a] * p.sum_v / p.uv)

    def constant_c(self, a: int) -> float:
        """Limit of ``J_n(a) / lam^n``."""
        p = self.perron
        return float(p.u[a] * p.sum_v / p.uv)

    def count_Jn(self, s: int, n: int) -> tuple[int, float]:
        """Exact ``J_n(s) = sum_u (A^n)[u, s]`` and the ratio ``J_n(s) / lam^n``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        A = [[int(v) for v in row] for row in self.ts.A]
        col = [1] * self.ts.d
        for _ in range(n):
            col = [sum(col[u] * A[u][a] for u in range(self.ts.d)) for a in range(self.ts.d)]
        count = col[s]
        try:
            ratio = count / self.lam**n
        except OverflowError:
            ratio = math.exp(math.log(count) - n * math.log(self.lam))
        return count, float(ratio)

    def subleading_modulus(self) -> float:
        ev = np.sort(np.abs(np.linalg.eigvals(self.ts.A.astype(float))))[::-1]
        return float(ev[1]) if len(ev) > 1 else 0.0

    # ------------------------------------------------------------------ sampling

    def rule(self) -> NuRule:
        return NuRule(self.pi, self.P)

    def sample_nu(self, seed, horizon: int = 64) -> LazyPoint:
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        src = LazySource(self.rule(), seed)
        src.ensure(horizon)
        return LazyPoint(src)

    def sample_continuation(self, seed, prefix: Sequence[int], horizon: int = 64) -> LazyPoint:
        """A point with the given prefix followed by a nu-Markov continuation."""
        src = LazySource(self.rule(), seed, initial=prefix)
        src.ensure(horizon)
        return LazyPoint(src)

    # ------------------------------------------------------- adic invariance

    def tau_preimage_mass(self, w: Sequence[int], tol: float = 1e-17) -> tuple[float, float]:
        """``nu(tau^-1 [w])`` by summing over carry-depth classes.

        The class of points whose carry happens at depth ``m`` with
        ``x_m = a, x_{m+1} = b`` is the cylinder ``[maxfill(a) a b]``; the adic
        map sends it onto ``[minfill(s) s b]`` and fixes later coordinates.
        Returns the mass and a bound on the truncated tail of the series.
        """
        self._check(w)
        ts, p = self.ts, self.perron
        n = len(w)
        w = tuple(w)
        pairs = [(a, b) for a in range(ts.d) for b in range(ts.d) if ts.A[a, b] and ts.next_larger[a, b] >= 0]
        vmax = float(p.v.max())
        M = max(n + 1, int(math.ceil(math.log(len(pairs) * vmax / (p.sum_v * tol * (1 - 1 / p.lam))) / math.log(p.lam))) + 1)
        total = 0.0
        for m in range(1, M + 1):
            for a, b in pairs:
                s = int(ts.next_larger[a, b])
                image = ts.min_fill(s, m - 1) + (s, b)
                if m + 1 >= n:
                    if image[:n] == w:
                        total += p.v[b] / (p.lam**m * p.sum_v)
                elif image == w[: m + 1]:
                    total += p.v[w[-1]] / (p.lam ** (n - 1) * p.sum_v)
        tail = len(pairs) * vmax / (p.sum_v * p.lam**M * (p.lam - 1))
        return total, tail
