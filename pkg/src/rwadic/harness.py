"""Limit laws, the return sequence, and Monte Carlo experiments on the skew product.

Orbits are seeded individually by ``[seed, orbit_index]`` and iterated by
compiled kernels; everything reported is reduced in orbit order, so results
do not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import _kernels as K
from . import adic
from .cocycle import Cocycle, birkhoff_sum, centered_sum, exchangeability_cocycle, psi, almost_onto
from .errors import BudgetExceeded, DegenerateGamma, MaximalPoint, NotAlmostOnto, OutOfSupport, ReturnBudgetExceeded
from .measures import Measures
from .spectral import CovarianceData, covariance, fiber_sum_counts
from .symbolic import AnyPoint, TransitionSystem, extreme_points, tail_index

BUFFER_WIDTH = 128
BUFFER_GROWTH = 64
MAX_BUFFER_WIDTH = 1 << 16
ELL_TOL = 1e-12
CENSOR_FACTOR = 200.0


# --------------------------------------------------------------------------
# limit laws


@dataclass(frozen=True)
class LimitLaw:
    """``Y_D = 2^(D/2) exp(-chi2_D / 2)`` (variant ``"Y"``) or ``W_D = exp(chi2_D / 2)`` (``"W"``)."""

    variant: str
    D: int

    def __post_init__(self):
        if self.variant not in ("Y", "W"):
            raise ValueError(f"unknown limit law variant {self.variant!r}")
        if self.D < 1:
            raise ValueError("D must be >= 1")

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 2 ** (self.D / 2)) if self.variant == "Y" else (1.0, math.inf)

    def cdf(self, x) -> np.ndarray:
        """Distribution function, extended by 0 and 1 outside the support."""
        x = np.asarray(x, dtype=float)
        a = self.D / 2
        if self.variant == "Y":
            top = 2**a
            with np.errstate(divide="ignore"):
                arg = (self.D * math.log(2) - 2 * np.log(np.clip(x, 1e-300, top))) / 2
            out = special.gammaincc(a, np.maximum(arg, 0.0))
            out = np.where(x <= 0, 0.0, out)
            return np.where(x >= top, 1.0, out)
        arg = np.log(np.maximum(x, 1.0))
        return special.gammainc(a, arg)

    def sample(self, seed, count: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        chi2 = (rng.standard_normal((count, self.D)) ** 2).sum(axis=1)
        if self.variant == "Y":
            return 2 ** (self.D / 2) * np.exp(-0.5 * chi2)
        return np.exp(0.5 * chi2)

    @property
    def mean(self) -> float:
        return 1.0 if self.variant == "Y" else math.inf


def law_cdf(law: LimitLaw, x: float) -> float:
    lo, hi = law.support
    if not lo <= x <= hi:
        raise OutOfSupport(f"{x} is outside [{lo}, {hi}]")
    return float(law.cdf(x))


def law_sample(law: LimitLaw, seed, count: int) -> np.ndarray:
    return law.sample(seed, count)


@dataclass
class EmpiricalDistribution:
    """Sorted samples; values above ``censor_at`` are known only to exceed it."""

    samples: np.ndarray
    censor_at: float = math.inf
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float))
        if self.weights is None:
            self.weights = np.full(len(self.samples), 1.0 / max(len(self.samples), 1))

    def __len__(self):
        return len(self.samples)

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.samples > self.censor_at)) if len(self) else 0.0

    @property
    def mean(self) -> float:
        return float(self.weights @ self.samples)

    def ks(self, cdf: Callable[[np.ndarray], np.ndarray] | LimitLaw) -> float:
        """Kolmogorov-Smirnov distance, taken over the uncensored range."""
        F = cdf.cdf if isinstance(cdf, LimitLaw) else cdf
        x = self.samples[self.samples <= self.censor_at]
        if not len(x):
            return float(F(np.array([self.censor_at]))[0])
        n = len(self)
        vals = F(x)
        upper = np.arange(1, len(x) + 1) / n
        lower = np.arange(0, len(x)) / n
        # ties: the empirical CDF jumps once per distinct value
        last = np.r_[x[1:] != x[:-1], True]
        first = np.r_[True, x[1:] != x[:-1]]
        d = max(np.max(np.abs(upper[last] - vals[last])), np.max(np.abs(vals[first] - lower[first])))
        if math.isfinite(self.censor_at):
            d = max(d, abs(len(x) / n - float(F(np.array([self.censor_at]))[0])))
        return float(d)


# --------------------------------------------------------------------------
# return sequence


def ell(lam: float, n: float) -> int:
    """``ceil(log_lam n)``, robust to rounding when ``n`` is a power of ``lam``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = max(int(math.floor(math.log(n) / math.log(lam))) - 1, 0)
    while lam**k < n * (1 - ELL_TOL):
        k += 1
    return k


def _scale(cov: CovarianceData) -> float:
    if cov.D < 1 or cov.det <= 0 or not cov.nondegenerate:
        raise DegenerateGamma(f"covariance is degenerate (D = {cov.D}, det = {cov.det:.3g})")
    return (4 * math.pi) ** (cov.D / 2) * math.sqrt(cov.det)


def return_sequence(lam: float, cov: CovarianceData, n: float) -> float:
    """``a(n) = n / (l_n^(D/2) (4 pi)^(D/2) sqrt(det Gamma))``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return n / (ell(lam, n) ** (cov.D / 2) * _scale(cov))


def return_sequence_inverse(lam: float, cov: CovarianceData, y: float) -> float:
    """``b(y) = inf {N >= 1 : 2^(D/2) a(N) >= y}`` over real ``N``.

    ``a`` drops at every power of ``lam`` because of the ceiling, so the
    infimum is found segment by segment rather than by bisection.
    """
    c = _scale(cov) / 2 ** (cov.D / 2)
    for k in range(1, 4096):
        lo, hi = lam ** (k - 1), lam**k
        need = y * k ** (cov.D / 2) * c
        if need <= hi:
            return max(need, lo)
    raise BudgetExceeded(f"no N found with a(N) >= {y}")


# --------------------------------------------------------------------------
# windows and orbit buffers


@dataclass(frozen=True)
class Window:
    """``{lattice points} x [lo, hi)`` in ``Z^k x R^(D-k)``."""

    lattice_points: tuple[tuple[int, ...], ...]
    real_lo: tuple[float, ...] = ()
    real_hi: tuple[float, ...] = ()

    @property
    def measure(self) -> float:
        vol = float(np.prod([b - a for a, b in zip(self.real_lo, self.real_hi)])) if self.real_lo else 1.0
        return len(self.lattice_points) * vol

    def contains(self, lattice: Sequence[int], real: Sequence[float] = ()) -> bool:
        if tuple(lattice) not in self.lattice_points:
            return False
        return all(a <= v < b for v, a, b in zip(real, self.real_lo, self.real_hi))

    @classmethod
    def origin(cls, k: int, D: int) -> "Window":
        return cls(((0,) * k,), (-0.5,) * (D - k), (0.5,) * (D - k))


def _window_arrays(windows: Sequence[Window], k: int, D: int):
    P = max(len(w.lattice_points) for w in windows)
    pts = np.zeros((len(windows), P, k), dtype=np.int64)
    npts = np.zeros(len(windows), dtype=np.int64)
    lo = np.zeros((len(windows), D - k))
    hi = np.zeros((len(windows), D - k))
    for i, w in enumerate(windows):
        npts[i] = len(w.lattice_points)
        for j, p in enumerate(w.lattice_points):
            pts[i, j] = p
        if D > k:
            lo[i], hi[i] = w.real_lo, w.real_hi
    return pts, npts, lo, hi


class OrbitBuffers:
    """Coordinates of many orbits, grown in fixed blocks from each start point."""

    def __init__(self, f: Cocycle, points: Sequence[AnyPoint], width: int = BUFFER_WIDTH):
        self.f = f
        self.points = list(points)
        self.width = width
        self.buf = np.array([p.prefix_word(width) for p in self.points], dtype=np.int64).reshape(len(self.points), width)
        self.next_larger = np.ascontiguousarray(f.ts.next_larger, dtype=np.int64)
        self.min_pred = np.ascontiguousarray(f.ts.min_pred, dtype=np.int64)
        lat, real = f.code_table()
        self.lat_tab = np.ascontiguousarray(lat)
        self.real_tab = np.ascontiguousarray(real)
        n = len(self.points)
        self.pos_lat = np.zeros((n, f.group.k), dtype=np.int64)
        self.pos_real = np.zeros((n, f.D - f.group.k))
        self.status = np.zeros(n, dtype=np.int64)

    def grow(self) -> None:
        new = self.width + BUFFER_GROWTH
        if new > MAX_BUFFER_WIDTH:
            raise MaximalPoint(f"an orbit reached a point maximal to depth {self.width}")
        extra = np.array([p.prefix_word(new)[self.width :] for p in self.points], dtype=np.int64)
        self.buf = np.ascontiguousarray(np.concatenate([self.buf, extra.reshape(len(self.points), -1)], axis=1))
        self.width = new

    def run(self, mode: int, cps: np.ndarray, width_out: int, windows=None, cylinders=None, budget: int = 0) -> np.ndarray:
        """Run every orbit to completion in the given kernel mode; returns ``out``."""
        n, k, kr = len(self.points), self.f.group.k, self.f.D - self.f.group.k
        if windows is not None:
            pts, npts, lo, hi = windows
        else:
            pts, npts = np.zeros((1, 1, k), dtype=np.int64), np.zeros(1, dtype=np.int64)
            lo = hi = np.zeros((1, kr))
        depth, code = cylinders if cylinders is not None else (np.zeros(0, dtype=np.int64),) * 2
        state = np.zeros((n, 3), dtype=np.int64)
        counts = np.zeros((n, width_out), dtype=np.int64)
        out = np.full((n, width_out, len(cps)), -1 if mode == K.RETURNS else 0, dtype=np.int64)
        while True:
            K.run_orbits(
                mode, self.buf, self.width, self.next_larger, self.min_pred, self.f.ts.d, self.f.r,
                self.lat_tab, self.real_tab, pts, npts, lo, hi, depth, code, cps, np.int64(budget),
                self.pos_lat, self.pos_real, state, counts, out, self.status,
            )
            if not np.any(self.status == K.NEED_MORE):
                return out
            self.grow()


def _checkpoints(n_list: Sequence[int]) -> np.ndarray:
    cps = np.asarray(n_list, dtype=np.int64)
    if len(cps) == 0 or np.any(np.diff(cps) <= 0) or cps[0] < 1:
        raise ValueError("checkpoints must be a strictly increasing list of positive integers")
    return cps


def occupation_counts(f: Cocycle, points: Sequence[AnyPoint], n_list: Sequence[int], windows: Sequence[Window]) -> np.ndarray:
    """``out[i, w, j] = S_{n_j}(1_{window w})(x_i, 0)``."""
    cps = _checkpoints(n_list)
    ob = OrbitBuffers(f, points)
    W = len(windows)
    pts, npts, lo, hi = _window_arrays(windows, f.group.k, f.D)
    return ob.run(K.OCCUPATION, cps, W, windows=(pts, npts, lo, hi))


@dataclass(frozen=True)
class OccupationResult:
    count: int
    n: int
    ell: int
    fbar_ell: np.ndarray


def simulate_occupation(f: Cocycle, x0: AnyPoint, n: int, window: Window) -> OccupationResult:
    """``S_n(1_{Sigma x I})(x0, 0)`` with the centered sum ``f-bar_{l_n}(x0)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = int(occupation_counts(f, [x0], [n], [window])[0, 0, 0])
    l = ell(f.measures.lam, max(n, 1))
    return OccupationResult(count, n, l, centered_sum(f, x0, l))


def occupation_by_blocks(f: Cocycle, x: AnyPoint, depth: int, blocks: int, window: Window) -> tuple[int, int]:
    """Occupation count over ``block_length + 1`` steps, assembled fiber by fiber.

    The first block is the tail of the fiber of ``x`` from ``x`` on; each
    further block is a whole fiber, where the count is read off the exact
    distribution of ``f_depth`` over that fiber.  Returns ``(steps, count)``.
    """
    ts = f.ts
    if f.group.k != f.D:
        raise ValueError("fiber decomposition needs a lattice-valued cocycle")
    steps = adic.block_length(ts, x, depth, blocks) + 1
    fv = adic.fiber(ts, x, depth)
    base = birkhoff_sum(f, x, depth)
    total = 0
    for w in fv.elements[fv.rank :]:
        z = x.replace_prefix(w)
        if window.contains((birkhoff_sum(f, z, depth) - base).lattice):
            total += 1
    z0 = x
    for _ in range(1, blocks):
        z0 = adic.next_fiber_start(ts, z0, depth)
        offset = np.array(psi(f, x, z0).lattice) - np.array(birkhoff_sum(f, z0, depth).lattice)
        counts = fiber_sum_counts(f, z0, depth)
        for m, c in counts.items():
            if window.contains(tuple(int(v) for v in np.array(m) + offset)):
                total += c
    return steps, total


# --------------------------------------------------------------------------
# sampling helpers


def nu_points(measures: Measures, seed: int, count: int) -> list[AnyPoint]:
    return [measures.sample_nu([seed, i]) for i in range(count)]


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


def _strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# --------------------------------------------------------------------------
# pointwise check


@dataclass(frozen=True)
class StarResult:
    lhs: float
    rhs: float
    indicator: int

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs) * self.indicator


def _star_from_count(f: Cocycle, cov: CovarianceData, x: AnyPoint, n: int, count: int, R: float, window: Window) -> StarResult:
    l = ell(f.measures.lam, n)
    fbar = centered_sum(f, x, l)
    ind = int(np.linalg.norm(fbar / math.sqrt(l)) < R)
    lhs = l ** (cov.D / 2) * count / n
    rhs = window.measure / math.sqrt((2 * math.pi) ** cov.D * cov.det) * math.exp(-cov.mahalanobis_sq(fbar) / (2 * l))
    return StarResult(lhs * ind, rhs * ind, ind)


def star_check(f: Cocycle, x: AnyPoint, n: int, R: float, window: Window | None = None, cov: CovarianceData | None = None) -> StarResult:
    cov = cov or covariance(f, with_hessian=False)
    cov.require_nondegenerate()
    window = window or Window.origin(f.group.k, f.D)
    count = int(occupation_counts(f, [x], [n], [window])[0, 0, 0])
    return _star_from_count(f, cov, x, n, count, R, window)


@dataclass
class StarTrend:
    n_list: list[int]
    results: list[list[StarResult]]  # results[j][i] for n_j and sample i
    medians: list[float]

    @property
    def decreasing(self) -> bool:
        return _strictly_decreasing(self.medians)


def star_trend(f: Cocycle, n_list: Sequence[int], samples: int, R: float, seed: int, window: Window | None = None, cov: CovarianceData | None = None) -> StarTrend:
    cov = cov or covariance(f, with_hessian=False)
    cov.require_nondegenerate()
    window = window or Window.origin(f.group.k, f.D)
    pts = nu_points(f.measures, seed, samples)
    out = occupation_counts(f, pts, n_list, [window])
    results = [[_star_from_count(f, cov, x, n, int(out[i, 0, j]), R, window) for i, x in enumerate(pts)] for j, n in enumerate(n_list)]
    return StarTrend(list(n_list), results, [_median([r.gap for r in row]) for row in results])


# --------------------------------------------------------------------------
# main theorem


@dataclass
class TheoremResult:
    n_list: list[int]
    a: list[float]
    raw: np.ndarray  # raw[i, w, j]
    distributions: list[EmpiricalDistribution]
    ks: list[float]
    means: list[float]
    window_ratio: list[float] | None
    law: LimitLaw

    @property
    def ks_decreasing(self) -> bool:
        return _strictly_decreasing(self.ks)


def theorem_mc(
    f: Cocycle,
    orbits: int,
    n_list: Sequence[int],
    seed: int,
    window: Window | None = None,
    doubled: Window | None = None,
    cov: CovarianceData | None = None,
) -> TheoremResult:
    """Empirical law of ``S_n / a(n)`` over independent nu-distributed orbits.

    Each window's normalization carries its own Haar mass, so the sample
    means should approach 1 for any window; ``window_ratio`` reports the
    raw mean of ``doubled`` over that of ``window`` when both are given.
    """
    cov = cov or covariance(f, with_hessian=False)
    cov.require_nondegenerate()
    window = window or Window.origin(f.group.k, f.D)
    windows = [window] + ([doubled] if doubled is not None else [])
    pts = nu_points(f.measures, seed, orbits)
    raw = occupation_counts(f, pts, n_list, windows)
    lam = f.measures.lam
    a = [return_sequence(lam, cov, n) for n in n_list]
    law = LimitLaw("Y", cov.D)
    dists = [EmpiricalDistribution(raw[:, 0, j] / (a[j] * window.measure)) for j in range(len(n_list))]
    ratio = None
    if doubled is not None:
        ratio = [float(raw[:, 1, j].mean() / raw[:, 0, j].mean()) for j in range(len(n_list))]
    return TheoremResult(list(n_list), a, raw, dists, [d.ks(law) for d in dists], [d.mean for d in dists], ratio, law)


# --------------------------------------------------------------------------
# exchangeability


def first_return_by_permutation(ts: TransitionSystem, x: AnyPoint, budget: int = 1 << 16) -> int:
    """Least ``n >= 1`` such that ``tau^n x`` is a finite permutation of ``x``."""
    y = x
    for n in range(1, budget + 1):
        y = adic.successor(ts, y)
        depth = tail_index(x, y)
        if sorted(x.prefix_word(depth)) == sorted(y.prefix_word(depth)):
            return n
    raise ReturnBudgetExceeded(f"no return within {budget} steps")


def first_return_by_cocycle(ts: TransitionSystem, x: AnyPoint, budget: int = 1 << 16) -> int:
    """Least ``n >= 1`` with ``f_n`` back at 0 along the skew product orbit of ``(x, 0)``."""
    f = exchangeability_cocycle(ts)
    ob = OrbitBuffers(f, [x])
    cps = _checkpoints([1])
    out = int(ob.run(K.RETURNS, cps, 1, budget=budget)[0, 0, 0])
    if out < 0:
        raise ReturnBudgetExceeded(f"no return within {budget} steps")
    return out


@dataclass
class ExchangeabilityResult:
    n_list: list[int]
    b: list[float]
    budget: int
    raw: np.ndarray  # raw[i, j], -1 when censored
    distributions: list[EmpiricalDistribution]
    ks: list[float]
    censored: list[float]
    means: list[float]
    law: LimitLaw

    @property
    def ks_decreasing(self) -> bool:
        return _strictly_decreasing(self.ks)

    @property
    def means_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.means, self.means[1:]))


def exchangeability_mc(ts: TransitionSystem, orbits: int, n_list: Sequence[int], seed: int, censor_factor: float = CENSOR_FACTOR) -> ExchangeabilityResult:
    """Law of ``(1/b(n)) * (time of the n-th return to Sigma x {0})`` against ``W_(d-1)``."""
    if not almost_onto(ts):
        raise NotAlmostOnto("transition matrix is not almost onto")
    f = exchangeability_cocycle(ts)
    cov = covariance(f, with_hessian=False)
    lam = f.measures.lam
    b = [return_sequence_inverse(lam, cov, n) for n in n_list]
    budget = int(math.ceil(censor_factor * b[-1]))
    cps = _checkpoints(n_list)
    pts = nu_points(f.measures, seed, orbits)
    ob = OrbitBuffers(f, pts)
    raw = ob.run(K.RETURNS, cps, 1, budget=budget)[:, 0, :]
    law = LimitLaw("W", cov.D)
    dists = []
    for j in range(len(cps)):
        cut = budget / b[j]
        vals = np.where(raw[:, j] >= 0, raw[:, j] / b[j], math.inf)
        dists.append(EmpiricalDistribution(vals, censor_at=cut))
    means = [float(np.mean(np.minimum(d.samples, d.censor_at))) for d in dists]
    return ExchangeabilityResult(list(n_list), b, budget, raw, dists, [d.ks(law) for d in dists], [d.censored_fraction for d in dists], means, law)


# --------------------------------------------------------------------------
# uniform convergence of ergodic averages


@dataclass(frozen=True)
class Cylinder:
    word: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.word)

    def code(self, d: int) -> int:
        c = 0
        for s in self.word:
            c = c * d + s
        return c


@dataclass
class UniformReport:
    n_list: list[int]
    sup_error: list[float]
    worst: list[tuple[int, tuple[int, ...]]]
    sample_count: int
    adversarial_count: int

    @property
    def decreasing(self) -> bool:
        """Non-increasing with a strict overall drop; exact equidistribution can give 0 twice."""
        e = self.sup_error
        return all(b <= a for a, b in zip(e, e[1:])) and e[-1] < e[0]


def adversarial_points(ts: TransitionSystem, measures: Measures, seed: int, depth: int = 20, per_point: int = 8) -> list[AnyPoint]:
    """Points agreeing with a maximal or minimal point to ``depth`` coordinates, then nu-random."""
    ext = extreme_points(ts)
    pts = []
    for j, e in enumerate(sorted(set(ext.maximal) | set(ext.minimal), key=str)):
        for i in range(per_point):
            pts.append(measures.sample_continuation([seed, 1, j, i], e.prefix_word(depth)))
    return pts


def uniform_convergence_check(
    ts: TransitionSystem,
    cylinders: Sequence[Sequence[int]],
    n_list: Sequence[int],
    sample_count: int,
    seed: int = 0,
    adversarial_depth: int = 20,
) -> UniformReport:
    """``sup |(1/n) sum_{k<n} 1_C(tau^k x) - nu(C)|`` over sampled points and cylinders."""
    cyls = [Cylinder(tuple(c)) for c in cylinders]
    if any(c.depth > 8 or c.depth < 1 for c in cyls):
        raise ValueError("cylinder depth must lie in 1..8")
    meas = Measures(ts)
    f = exchangeability_cocycle(ts, meas) if ts.d > 1 else None
    if f is None:
        raise ValueError("need at least two symbols")
    pts = nu_points(meas, seed, sample_count)
    adv = adversarial_points(ts, meas, seed, adversarial_depth)
    pts = pts + adv
    cps = _checkpoints(n_list)
    ob = OrbitBuffers(f, pts)
    depth = np.array([c.depth for c in cyls], dtype=np.int64)
    code = np.array([c.code(ts.d) for c in cyls], dtype=np.int64)
    out = ob.run(K.CYLINDERS, cps, len(cyls), cylinders=(depth, code))
    target = np.array([meas.nu_cylinder(c.word) if ts.is_admissible(c.word) else 0.0 for c in cyls])
    sup, worst = [], []
    for j, m in enumerate(cps):
        err = np.abs(out[:, :, j] / m - target[None, :])
        i, q = np.unravel_index(int(np.argmax(err)), err.shape)
        sup.append(float(err[i, q]))
        worst.append((int(i), cyls[q].word))
    return UniformReport(list(n_list), sup, worst, sample_count, len(adv))


# --------------------------------------------------------------------------
# fiber-count asymptotics


@dataclass
class FiberCountReport:
    n_list: list[int]
    ratios: list[list[float]]  # ratios[j][i] = N_n / prediction
    medians: list[float]

    @property
    def decreasing(self) -> bool:
        return _strictly_decreasing(self.medians)


def fiber_count(f: Cocycle, x: AnyPoint, n: int, window: Window) -> int:
    """``#{z in fiber of x at depth n : f_n(z) - f_n(x) in I}``."""
    counts = fiber_sum_counts(f, x, n)
    base = np.array(birkhoff_sum(f, x, n).lattice)
    return sum(c for m, c in counts.items() if window.contains(tuple(int(v) for v in np.array(m) - base)))


def fiber_count_prediction(f: Cocycle, cov: CovarianceData, x: AnyPoint, n: int, window: Window) -> float:
    meas = f.measures
    t = centered_sum(f, x, n)
    return (
        meas.lam**n
        * meas.density_h(x.coordinate(n + 1))
        * window.measure
        / math.sqrt((2 * math.pi * n) ** cov.D * cov.det)
        * math.exp(-cov.mahalanobis_sq(t) / (2 * n))
    )


def fiber_count_check(f: Cocycle, n_list: Sequence[int], samples: int, seed: int, window: Window | None = None, cov: CovarianceData | None = None) -> FiberCountReport:
    cov = cov or covariance(f, with_hessian=False)
    cov.require_nondegenerate()
    window = window or Window.origin(f.group.k, f.D)
    pts = nu_points(f.measures, seed, samples)
    ratios = [[fiber_count(f, x, n, window) / fiber_count_prediction(f, cov, x, n, window) for x in pts] for n in n_list]
    return FiberCountReport(list(n_list), ratios, [_median(np.abs(np.array(r) - 1)) for r in ratios])
