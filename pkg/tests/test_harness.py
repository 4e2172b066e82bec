import math

import numpy as np
import pytest
from scipy import stats

from rwadic import harness, spectral
from rwadic.cocycle import Cocycle, GroupSpec, SkewState, skew_orbit
from rwadic.errors import NotAlmostOnto, OutOfSupport, ReturnBudgetExceeded
from rwadic.symbolic import ExactPoint, extend_to_cycle, generic_cycle, validate_tms

from conftest import MATRICES


# ---------------------------------------------------------------- limit laws


@pytest.mark.parametrize("D", [1, 2, 3])
def test_y_law(D):
    law = harness.LimitLaw("Y", D)
    x = law.sample(0, 200_000)
    assert x.mean() == pytest.approx(1.0, abs=0.01)
    assert stats.kstest(x, law.cdf).statistic < 0.005
    assert law.cdf(0.0) == 0 and law.cdf(2 ** (D / 2)) == 1


def test_w_law():
    law = harness.LimitLaw("W", 1)
    x = law.sample(1, 100_000)
    assert x.min() >= 1
    assert stats.kstest(x, law.cdf).statistic < 0.01
    # P(W <= e^(1/2)) = P(chi2_1 <= 1)
    assert law.cdf(math.exp(0.5)) == pytest.approx(stats.chi2.cdf(1, 1))


def test_law_cdf_support():
    with pytest.raises(OutOfSupport):
        harness.law_cdf(harness.LimitLaw("Y", 1), 2.0)
    with pytest.raises(OutOfSupport):
        harness.law_cdf(harness.LimitLaw("W", 2), 0.5)
    with pytest.raises(ValueError):
        harness.LimitLaw("Z", 1)


def test_ks_matches_scipy():
    x = np.random.default_rng(3).normal(size=500)
    emp = harness.EmpiricalDistribution(x)
    assert emp.ks(stats.norm.cdf) == pytest.approx(stats.kstest(x, stats.norm.cdf).statistic, abs=1e-12)


def test_ks_with_ties_and_censoring():
    emp = harness.EmpiricalDistribution(np.array([0.0, 0.0, 1.0, 1.0]))
    # F(0) = 1/3 while the empirical CDF is 0 just below 0, 1/2 at 0 and 1 at 1
    assert emp.ks(lambda v: np.clip((np.asarray(v) + 1) / 3, 0, 1)) == pytest.approx(1 / 3)
    law = harness.LimitLaw("W", 1)
    x = law.sample(2, 4000)
    cut = float(np.quantile(x, 0.9))
    cens = harness.EmpiricalDistribution(np.where(x > cut, np.inf, x), censor_at=cut)
    full = harness.EmpiricalDistribution(x)
    assert cens.censored_fraction == pytest.approx(0.1, abs=1e-3)
    assert cens.ks(law) <= full.ks(law) + 1e-12


# ---------------------------------------------------------- return sequence


def test_ell_exact_powers():
    assert [harness.ell(2.0, 2**k) for k in range(1, 30)] == list(range(1, 30))
    assert harness.ell(2.0, 2**10 + 1) == 11
    phi = (1 + 5**0.5) / 2
    assert harness.ell(phi, phi**7) == 7


def test_return_sequence_hik(hik):
    cov = spectral.covariance(hik)
    for n in (10, 1000, 10**6):
        expected = n / math.sqrt(math.pi * math.ceil(math.log2(n)))
        assert harness.return_sequence(2.0, cov, n) == pytest.approx(expected, rel=1e-10)


def test_return_sequence_inverse(hik):
    cov = spectral.covariance(hik)
    for y in (3.0, 50.0, 1e4, 1e5):
        N = harness.return_sequence_inverse(2.0, cov, y)
        assert math.sqrt(2) * harness.return_sequence(2.0, cov, N) >= y * (1 - 1e-12)
        assert math.sqrt(2) * harness.return_sequence(2.0, cov, N * 0.999) < y


# ------------------------------------------------------- orbit kernel oracle


def _python_counts(f, x, n, windows):
    orbit = skew_orbit(f, SkewState(x, f.group.zero()), n - 1)
    return [sum(w.contains(s.position.lattice, s.position.real) for s in orbit) for w in windows]


def test_kernel_matches_python_skew_product(golden):
    # dyadic real parts keep both computations exact, including on window edges
    table = {w: [w[0] - w[1], 0.25 * w[0] - 0.125] for w in golden.words(2)}
    f = Cocycle(golden, 2, GroupSpec(1, 2), table)
    windows = [
        harness.Window(((0,),), (-0.5,), (0.5,)),
        harness.Window(((0,), (1,)), (-2.0,), (0.0,)),
        harness.Window(((-1,),), (0.0,), (3.0,)),
    ]
    pts = harness.nu_points(f.measures, 4, 6)
    n_list = [50, 300, 700]
    out = harness.occupation_counts(f, pts, n_list, windows)
    for i, x in enumerate(pts):
        for j, n in enumerate(n_list):
            assert list(out[i, :, j]) == _python_counts(f, x, n, windows)


def test_kernel_buffer_growth(full2, hik):
    # starts close to the maximal point, so the first carries run deep
    x = ExactPoint((1,) * 100, (0,))
    out = harness.occupation_counts(hik, [x], [5], [harness.Window(((0,),))])
    assert out[0, 0, 0] == _python_counts(hik, x, 5, [harness.Window(((0,),))])[0]


def test_simulate_occupation(hik):
    x = ExactPoint((0, 1, 1, 0), (0,))
    res = harness.simulate_occupation(hik, x, 1000, harness.Window(((0,),)))
    assert res.ell == 10
    assert res.count == _python_counts(hik, x, 1000, [harness.Window(((0,),))])[0]


@pytest.mark.parametrize("depth,blocks", [(3, 1), (3, 4), (5, 2), (8, 3)])
def test_block_decomposition(golden_f, depth, blocks):
    window = harness.Window(((0,), (1,)))
    for x in harness.nu_points(golden_f.measures, 8, 5):
        steps, count = harness.occupation_by_blocks(golden_f, x, depth, blocks, window)
        assert count == _python_counts(golden_f, x, steps, [window])[0]


# ----------------------------------------------------------- exchangeability


@pytest.mark.parametrize("name", ["full2", "golden"])
def test_first_return_definitions(name):
    ts = validate_tms(MATRICES[name])
    tail = generic_cycle(ts)
    for w in ts.words(5):
        x = extend_to_cycle(ts, w, tail)
        assert harness.first_return_by_permutation(ts, x) == harness.first_return_by_cocycle(ts, x)


def test_minimal_point_never_returns(full2):
    x = ExactPoint((), (0,))
    with pytest.raises(ReturnBudgetExceeded):
        harness.first_return_by_permutation(full2, x, budget=500)
    with pytest.raises(ReturnBudgetExceeded):
        harness.first_return_by_cocycle(full2, x, budget=500)


def test_exchangeability_requires_almost_onto():
    ts = validate_tms([[0, 1, 1, 0], [0, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 0]])
    with pytest.raises(NotAlmostOnto):
        harness.exchangeability_mc(ts, 10, [10], 0)


def test_exchangeability_small(full2):
    er = harness.exchangeability_mc(full2, 200, [10, 100], 5)
    assert er.raw.shape == (200, 2)
    assert np.all(er.raw[:, 1] > er.raw[:, 0])
    assert max(er.censored) < 0.05


# ------------------------------------------------- uniform, fiber counts, star


def test_uniform_small(golden):
    cyl = [w for L in (1, 2) for w in golden.words(L)]
    rep = harness.uniform_convergence_check(golden, cyl, [100, 1000, 10000], 20, seed=1)
    assert rep.decreasing
    assert rep.adversarial_count == 3 * 8


def test_fiber_count_small(hik):
    rep = harness.fiber_count_check(hik, [6, 10, 14], 40, seed=2)
    assert rep.medians[-1] < 0.1


def test_star_check_single(hik):
    res = harness.star_check(hik, harness.nu_points(hik.measures, 3, 1)[0], 10**4, 3.0)
    assert res.indicator in (0, 1)
    assert res.gap < 0.5
