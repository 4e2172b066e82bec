"""Finite-dimensional transfer operators for locally constant cocycles.

For a cocycle of range ``r`` the Parry-measure transfer operator maps
functions of the first ``r`` coordinates to themselves, so it is a finite
matrix on admissible ``r``-words.  Everything here (covariance, the
perturbed leading eigenvalue, exact laws of Birkhoff sums) is computed from
that matrix.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .cocycle import Cocycle
from .errors import BudgetExceeded, DegenerateGamma, EigenvalueCollision
from .measures import Measures
from .symbolic import AnyPoint

SERIES_TOL = 1e-18
SERIES_MAX_TERMS = 100_000
HESSIAN_STEPS = (1e-2, 5e-3, 2.5e-3)
DP_BUDGET = 50_000_000


@dataclass(frozen=True)
class TransferMatrix:
    """``L[w', w]`` is the weight of ``w`` in ``(sigma-hat F)(w')``; ``L @ 1 = 1``."""

    words: list[tuple[int, ...]]
    L: np.ndarray
    stationary: np.ndarray

    def apply(self, F: np.ndarray) -> np.ndarray:
        return self.L @ F

    def integrate(self, F: np.ndarray) -> float:
        return float(self.stationary @ F)

    def subleading_modulus(self) -> float:
        ev = np.sort(np.abs(np.linalg.eigvals(self.L)))[::-1]
        return float(ev[1]) if len(ev) > 1 else 0.0


def build_transfer(measures: Measures, r: int) -> TransferMatrix:
    ts = measures.ts
    words = ts.words(r)
    index = {w: i for i, w in enumerate(words)}
    pi, P = measures.stationary, measures.P
    L = np.zeros((len(words), len(words)))
    for j, wp in enumerate(words):
        head = wp[0]
        for a in range(ts.d):
            if ts.A[a, head]:
                w = (a,) + wp[: r - 1]
                L[j, index[w]] += pi[a] * P[a, head] / pi[head]
    stationary = np.array([measures.mu_cylinder(w) for w in words])
    return TransferMatrix(words, L, stationary)


def transfer_for(f: Cocycle) -> TransferMatrix:
    return build_transfer(f.measures, f.r)


# --------------------------------------------------------------------------
# covariance


@dataclass(frozen=True)
class CovarianceData:
    Gamma: np.ndarray
    det: float
    U: np.ndarray
    M: np.ndarray  # diagonal entries
    Gamma_series: np.ndarray
    Gamma_hessian: np.ndarray | None
    discrepancy: float | None
    tail_bound: float
    terms: int
    nondegenerate: bool

    @property
    def D(self) -> int:
        return self.Gamma.shape[0]

    def require_nondegenerate(self) -> None:
        if not self.nondegenerate or self.det <= 0:
            raise DegenerateGamma(f"covariance is singular (det = {self.det:.3g})")

    def mahalanobis_sq(self, z: np.ndarray) -> float:
        """``||M^-1 U z||^2``, which equals ``z^t Gamma^-1 z``."""
        w = (self.U @ np.asarray(z, dtype=float)) / self.M
        return float(w @ w)

    def density(self, u: np.ndarray) -> float:
        return math.exp(-0.5 * self.mahalanobis_sq(u)) / math.sqrt((2 * math.pi) ** self.D * self.det)


def gamma_series(f: Cocycle, tm: TransferMatrix | None = None) -> tuple[np.ndarray, float, int]:
    """Asymptotic covariance as the correlation series, with a tail-error bound."""
    tm = tm or transfer_for(f)
    F = f.centered  # (words, D)
    pi = tm.stationary
    G = (F * pi[:, None]).T @ F
    rho = tm.subleading_modulus()
    V = F.copy()
    n = 0
    tail = 0.0
    while n < SERIES_MAX_TERMS:
        V = tm.L @ V
        # remove rounding drift along the constant eigenvector, which never decays
        V = V - (pi @ V)[None, :]
        n += 1
        C = (F * pi[:, None]).T @ V  # C[j, i] = E(f_i . f_j o sigma^n)
        G = G + C + C.T
        size = float(np.abs(V).max()) if V.size else 0.0
        if size < SERIES_TOL:
            break
    if rho > 0 and rho < 1:
        tail = 2 * float(np.abs(F).max()) * size * rho / (1 - rho)
    return 0.5 * (G + G.T), tail, n


def _richardson(values: Sequence[np.ndarray], steps: Sequence[float]) -> np.ndarray:
    """Neville extrapolation to step 0 for an error expansion in ``h^2``."""
    T = [np.asarray(v, dtype=complex) for v in values]
    for level in range(1, len(T)):
        T = [
            (T[i + 1] * steps[i] ** 2 - T[i] * steps[i + level] ** 2) / (steps[i] ** 2 - steps[i + level] ** 2)
            for i in range(len(T) - 1)
        ]
    return T[0]


def log_lambda_hessian(f: Cocycle, steps: Sequence[float] = HESSIAN_STEPS, centered: bool = True) -> np.ndarray:
    """Hessian at 0 of ``log lambda(t)`` by central differences and Richardson extrapolation."""
    D = f.D
    tm = transfer_for(f)

    def g(t):
        return np.log(nagaev_lambda(f, t, tm=tm, centered=centered, radius=None))

    estimates = []
    g0 = g(np.zeros(D))
    for h in steps:
        H = np.zeros((D, D), dtype=complex)
        E = np.eye(D) * h
        for i in range(D):
            H[i, i] = (g(E[i]) - 2 * g0 + g(-E[i])) / h**2
            for j in range(i + 1, D):
                H[i, j] = H[j, i] = (
                    g(E[i] + E[j]) - g(E[i] - E[j]) - g(-E[i] + E[j]) + g(-E[i] - E[j])
                ) / (4 * h**2)
        estimates.append(H)
    return _richardson(estimates, steps)


def gamma_hessian(f: Cocycle, steps: Sequence[float] = HESSIAN_STEPS) -> np.ndarray:
    H = log_lambda_hessian(f, steps)
    G = -H.real
    return 0.5 * (G + G.T)


def covariance(f: Cocycle, with_hessian: bool = True, rank_tol: float = 1e-10) -> CovarianceData:
    tm = transfer_for(f)
    Gs, tail, terms = gamma_series(f, tm)
    Gh = gamma_hessian(f) if with_hessian else None
    w, V = np.linalg.eigh(Gs)
    nondeg = bool(f.D > 0 and w.min() > rank_tol * max(1.0, abs(w).max()))
    M = np.sqrt(np.clip(w, 0, None))
    return CovarianceData(
        Gamma=Gs,
        det=float(np.prod(w)) if f.D else 0.0,
        U=V.T,
        M=M,
        Gamma_series=Gs,
        Gamma_hessian=Gh,
        discrepancy=float(np.abs(Gs - Gh).max()) if Gh is not None else None,
        tail_bound=tail,
        terms=terms,
        nondegenerate=nondeg,
    )


# --------------------------------------------------------------------------
# perturbed operator


def perturbation_radius(f: Cocycle) -> float:
    return 0.5 / max(f.sup_norm, 1e-300)


def twisted_matrix(f: Cocycle, t: np.ndarray, tm: TransferMatrix | None = None, centered: bool = False) -> np.ndarray:
    """Matrix of ``F -> sigma-hat(exp(i t.f) F)``."""
    tm = tm or transfer_for(f)
    vals = f.centered if centered else f.matrix
    phase = np.exp(1j * (vals @ np.atleast_1d(np.asarray(t, dtype=float))))
    return tm.L * phase[None, :]


def nagaev_lambda(
    f: Cocycle,
    t,
    tm: TransferMatrix | None = None,
    centered: bool = False,
    radius: float | None = -1.0,
    path_steps: int = 16,
    gap_tol: float = 1e-9,
) -> complex:
    """Leading eigenvalue of the twisted operator, continued from ``lambda(0) = 1``.

    ``radius=-1`` uses the default perturbation radius; ``None`` disables the
    check.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if radius is not None:
        limit = perturbation_radius(f) if radius < 0 else radius
        if np.linalg.norm(t) > limit:
            raise ValueError(f"|t| = {np.linalg.norm(t):.3g} exceeds perturbation radius {limit:.3g}")
    tm = tm or transfer_for(f)
    if not t.any():
        return 1.0 + 0.0j
    current = 1.0 + 0.0j
    for s in np.linspace(0, 1, path_steps + 1)[1:]:
        ev = np.linalg.eigvals(twisted_matrix(f, s * t, tm, centered))
        dist = np.abs(ev - current)
        order = np.argsort(dist)
        if len(ev) > 1 and dist[order[1]] - dist[order[0]] < gap_tol:
            raise EigenvalueCollision(f"branch of lambda is ambiguous at t = {s * t}")
        current = complex(ev[order[0]])
    return current


def spectral_radius(f: Cocycle, t, tm: TransferMatrix | None = None) -> float:
    return float(np.abs(np.linalg.eigvals(twisted_matrix(f, t, tm))).max())


# --------------------------------------------------------------------------
# exact laws of Birkhoff sums


def _require_lattice(f: Cocycle) -> None:
    if f.group.k != f.D:
        raise ValueError("exact distributions need a purely lattice-valued cocycle")


def exact_fn_distribution(f: Cocycle, n: int) -> dict[tuple[int, ...], float]:
    """Law of ``f_n`` under the Parry measure, by dynamic programming over windows."""
    _require_lattice(f)
    ts, meas, D = f.ts, f.measures, f.D
    if n == 0:
        return {(0,) * D: 1.0}
    vals = np.array([f.table[w].lattice for w in f.words], dtype=np.int64).reshape(len(f.words), D)
    lo = n * np.minimum(vals.min(axis=0), 0)
    hi = n * np.maximum(vals.max(axis=0), 0)
    shape = tuple(int(v) for v in hi - lo + 1)
    if len(f.words) * int(np.prod(shape)) > DP_BUDGET:
        raise BudgetExceeded(f"state x support size {len(f.words) * int(np.prod(shape))} exceeds {DP_BUDGET}")
    index = {w: i for i, w in enumerate(f.words)}
    P = meas.P
    dist = np.zeros((len(f.words),) + shape)
    origin = tuple(int(v) for v in -lo)
    for i, w in enumerate(f.words):
        dist[(i,) + origin] = meas.mu_cylinder(w)
    succ = [[(index[w[1:] + (b,)], P[w[-1], b]) for b in range(ts.d) if ts.A[w[-1], b]] for w in f.words]
    for step in range(n):
        shifted = np.zeros_like(dist)
        for i in range(len(f.words)):
            shifted[i] = _shift(dist[i], vals[i])
        if step == n - 1:
            dist = shifted
            break
        dist = np.zeros_like(shifted)
        for i in range(len(f.words)):
            for j, p in succ[i]:
                dist[j] += p * shifted[i]
    total = dist.sum(axis=0)
    out = {}
    for idx in zip(*np.nonzero(total)):
        out[tuple(int(a + b) for a, b in zip(idx, lo))] = float(total[idx])
    return out


def _shift(arr: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    src, dst = [], []
    for size, s in zip(arr.shape, g):
        s = int(s)
        if s >= 0:
            src.append(slice(0, size - s))
            dst.append(slice(s, size))
        else:
            src.append(slice(-s, size))
            dst.append(slice(0, size + s))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def fiber_sum_counts(f: Cocycle, x: AnyPoint, n: int) -> Counter:
    """``m -> #{w in fiber over sigma^n x : f_n(w . sigma^n x) = m}``, exact integers."""
    _require_lattice(f)
    ts, r = f.ts, f.r
    width = max(r - 1, 1)
    tail = tuple(x.prefix_word(n + width)[n:])
    layer: dict[tuple, Counter] = {tail: Counter({(0,) * f.D: 1})}
    for _ in range(n):
        nxt: dict[tuple, Counter] = defaultdict(Counter)
        for state, sums in layer.items():
            for a in np.flatnonzero(ts.A[:, state[0]]).tolist():
                window = ((a,) + state)[:r]
                g = f.table[window].lattice
                new_state = ((a,) + state)[:width]
                bucket = nxt[new_state]
                for m, c in sums.items():
                    bucket[tuple(p + q for p, q in zip(m, g))] += c
        layer = nxt
    total: Counter = Counter()
    for sums in layer.values():
        total.update(sums)
    return total


# --------------------------------------------------------------------------
# CLT / LLT reports


@dataclass(frozen=True)
class ReportRow:
    n: int
    statistic: float
    reference: float
    label: str = ""

    @property
    def abs_err(self) -> float:
        return abs(self.statistic - self.reference)

    @property
    def rel_err(self) -> float:
        return self.abs_err / abs(self.reference) if self.reference else math.inf


@dataclass
class Report:
    name: str
    rows: list[ReportRow] = field(default_factory=list)

    def errors_by_n(self, reduce=max) -> dict[int, float]:
        grouped = defaultdict(list)
        for row in self.rows:
            grouped[row.n].append(row.abs_err)
        return {n: reduce(v) for n, v in sorted(grouped.items())}

    def decreasing(self) -> bool:
        errs = list(self.errors_by_n().values())
        return all(b < a for a, b in zip(errs, errs[1:]))


def _gaussian_box(cov: CovarianceData, lo: np.ndarray, hi: np.ndarray) -> float:
    D = cov.D
    if D == 1:
        s = math.sqrt(cov.Gamma[0, 0])
        return float(stats.norm.cdf(hi[0] / s) - stats.norm.cdf(lo[0] / s))
    mvn = stats.multivariate_normal(mean=np.zeros(D), cov=cov.Gamma)
    total = 0.0
    for corner in itertools.product((0, 1), repeat=D):
        pt = np.where(np.array(corner) == 1, hi, lo)
        sign = (-1) ** (D - sum(corner))
        total += sign * mvn.cdf(np.clip(pt, -40, 40))
    return float(total)


def default_boxes(D: int) -> list[tuple[np.ndarray, np.ndarray]]:
    edges = [-np.inf, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, np.inf]
    out = []
    for a, b in itertools.combinations(edges, 2):
        if D == 1:
            out.append((np.array([a]), np.array([b])))
        else:
            out.append((np.full(D, a), np.full(D, b)))
    return out


def clt_check(f: Cocycle, n_list: Sequence[int], cov: CovarianceData, boxes=None) -> Report:
    """``|P(f-bar_n / sqrt n in box) - Gaussian(box)|`` for each n and box.

    Boxes are half-open ``(lo, hi]`` so that a one-dimensional box
    probability is a difference of distribution-function values.
    """
    boxes = boxes if boxes is not None else default_boxes(f.D)
    rep = Report("clt")
    for n in n_list:
        dist = exact_fn_distribution(f, n)
        pts = np.array(list(dist.keys()), dtype=float).reshape(len(dist), f.D)
        probs = np.array(list(dist.values()))
        scaled = (pts - n * f.mean) / math.sqrt(n)
        for lo, hi in boxes:
            inside = np.all((scaled > lo) & (scaled <= hi), axis=1)
            rep.rows.append(ReportRow(n, float(probs[inside].sum()), _gaussian_box(cov, lo, hi), f"{lo.tolist()}..{hi.tolist()}"))
    return rep


def llt_check(f: Cocycle, n_list: Sequence[int], cov: CovarianceData, targets: Sequence[Sequence[float]]) -> Report:
    """``n^(D/2) P(f_n = m)`` at the lattice point ``m`` nearest ``n E(f) + sqrt(n) u``."""
    rep = Report("llt")
    for n in n_list:
        dist = exact_fn_distribution(f, n)
        for u in targets:
            u = np.atleast_1d(np.asarray(u, dtype=float))
            m = np.rint(n * f.mean + math.sqrt(n) * u).astype(np.int64)
            realized = (m - n * f.mean) / math.sqrt(n)
            stat = n ** (f.D / 2) * dist.get(tuple(int(v) for v in m), 0.0)
            rep.rows.append(ReportRow(n, stat, cov.density(realized), f"u={u.tolist()}"))
    return rep
