import math

import numpy as np
import pytest

from rwadic import adic
from rwadic.errors import EmptyRowOrColumn, InadmissibleWord, NotPrimitive
from rwadic.measures import Measures
from rwadic.symbolic import (
    ExactPoint,
    LazyPoint,
    LazySource,
    agreement_index,
    compact_successor_sets,
    extend_to_cycle,
    extreme_points,
    generic_cycle,
    in_sigma_prime,
    tail_index,
    validate_tms,
)

from conftest import MATRICES


def test_validate_classifies():
    ts = validate_tms([[1, 1], [1, 0]])
    assert ts.primitive and ts.irreducible and ts.period == 1
    flip = validate_tms([[0, 1], [1, 0]])
    assert flip.irreducible and not flip.primitive and flip.period == 2
    with pytest.raises(NotPrimitive):
        flip.require_primitive()


@pytest.mark.parametrize("bad", [[[1, 1], [0, 0]], [[1, 0], [1, 0]]])
def test_empty_row_or_column(bad):
    with pytest.raises(EmptyRowOrColumn):
        validate_tms(bad)


@pytest.mark.parametrize("bad", [[[1, 2], [1, 1]], [[1, 1, 1], [1, 1, 1]], []])
def test_rejects_malformed(bad):
    with pytest.raises(ValueError):
        validate_tms(bad)


def test_words_are_admissible_and_counted(golden):
    for n in range(1, 8):
        words = golden.words(n)
        assert all(golden.is_admissible(w) for w in words)
        # Fibonacci numbers
        assert len(words) == [2, 3, 5, 8, 13, 21, 34][n - 1]


def test_exact_point_normal_form():
    assert ExactPoint((0, 1, 1), (1,)) == ExactPoint((0,), (1,))
    assert ExactPoint((), (0, 1, 0, 1)) == ExactPoint((), (0, 1))
    # absorbing a trailing prefix symbol rotates the cycle
    assert ExactPoint((1, 0), (1, 0)) == ExactPoint((), (1, 0))
    p = ExactPoint((2, 0), (1, 0))
    assert p.prefix_word(7) == (2, 0, 1, 0, 1, 0, 1)
    assert p.shift(3).prefix_word(4) == (0, 1, 0, 1)
    with pytest.raises(ValueError):
        ExactPoint((1,), ())
    with pytest.raises(IndexError):
        p.coordinate(0)


def test_replace_prefix_matches_coordinatewise():
    p = ExactPoint((1, 1, 0), (0, 1))
    for word in [(), (0,), (0, 0, 0), (1, 0, 1, 1, 1)]:
        q = p.replace_prefix(word)
        expected = tuple(word) + p.prefix_word(12)[len(word):]
        assert q.prefix_word(12) == expected


def test_lazy_source_is_order_independent(golden_measures):
    rule = golden_measures.rule()
    a = LazySource(rule, 5)
    b = LazySource(rule, 5)
    a.ensure(10)
    a.ensure(700)
    b.ensure(700)
    assert a.slice(1, 700) == b.slice(1, 700)
    x = LazyPoint(a)
    assert x.shift(3).prefix_word(5) == x.prefix_word(8)[3:]


def test_agreement_and_tail_index():
    x = ExactPoint((0, 1, 1), (0,))
    y = ExactPoint((0, 0, 1), (0,))
    assert agreement_index(x, y) == 2
    assert agreement_index(x, x) == math.inf
    assert tail_index(x, y) == 2
    assert tail_index(x, ExactPoint((), (1,))) is None
    src = LazySource(adic.UniformRule(validate_tms([[1, 1], [1, 1]])), 0)
    u = LazyPoint(src, head=(1, 0, 1))
    v = LazyPoint(src, head=(0, 0, 0))
    assert tail_index(u, v) == 3
    assert agreement_index(u, v) == 1


def _brute_extremes(ts):
    maximal, minimal = set(), set()
    for n in range(1, ts.d + 1):
        for w in ts.words(n):
            if not ts.A[w[-1], w[0]]:
                continue
            p = ExactPoint.periodic(w)
            if adic.carry_depth(ts, p) is None:
                maximal.add(p)
            if adic.borrow_depth(ts, p) is None:
                minimal.add(p)
    return maximal, minimal


@pytest.mark.parametrize("name", sorted(MATRICES))
def test_extreme_points_brute_force(name):
    ts = validate_tms(MATRICES[name])
    ext = extreme_points(ts)
    bmax, bmin = _brute_extremes(ts)
    assert set(ext.maximal) == bmax
    assert set(ext.minimal) == bmin
    assert all(ext.is_maximal(p) for p in bmax)


def test_golden_mean_extremes(golden):
    ext = extreme_points(golden)
    assert set(ext.maximal) == {ExactPoint.periodic((1, 0)), ExactPoint.periodic((0, 1))}
    assert set(ext.minimal) == {ExactPoint.periodic((0,))}


def test_sigma_prime(full2):
    assert not in_sigma_prime(full2, ExactPoint((0, 1), (1,)))
    assert in_sigma_prime(full2, ExactPoint((), (0, 1)))


@pytest.mark.parametrize("name", sorted(MATRICES))
def test_compact_sets_match_oracle(name):
    ts = validate_tms(MATRICES[name])
    analytic = compact_successor_sets(ts)
    for i, (w, lim) in enumerate(analytic.items()):
        assert adic.approach_limits(ts, w, samples=60, seed=i) == set(lim)


def test_compact_full_shift(full2):
    assert compact_successor_sets(full2) == {ExactPoint.periodic((1,)): frozenset({ExactPoint.periodic((0,))})}


def test_compact_requires_mixing():
    with pytest.raises(NotPrimitive):
        compact_successor_sets(validate_tms([[0, 1], [1, 0]]))


@pytest.mark.parametrize("name", sorted(MATRICES))
def test_generic_cycle(name):
    ts = validate_tms(MATRICES[name])
    w = generic_cycle(ts)
    assert in_sigma_prime(ts, ExactPoint.periodic(w))
    assert ExactPoint.periodic(w).is_admissible(ts)


def test_extend_to_cycle(golden):
    x = extend_to_cycle(golden, (1,), (1, 0))
    assert x.is_admissible(golden)
    assert x.prefix_word(1) == (1,)
    with pytest.raises(InadmissibleWord):
        extend_to_cycle(golden, (1, 1), (0,))


def test_nu_sample_is_admissible(golden_measures):
    x = golden_measures.sample_nu(3, horizon=200)
    assert golden_measures.ts.is_admissible(x.prefix_word(200))
    assert np.isclose(Measures(golden_measures.ts).lam, golden_measures.lam)
