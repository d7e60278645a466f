import math

import pytest
from gmpy2 import mpq, mpz
from hypothesis import given
from hypothesis import strategies as st

from dirichlet_lab.errors import EmptyPrefix
from dirichlet_lab.interval import RatInterval
from dirichlet_lab.ratcf import (
    CFState,
    best_approx_distance,
    cf_expand,
    cf_expand_certified,
    cf_value,
    convergent_distance,
    identity_rhs,
    tail_bounds,
    word_cylinder,
)
from strategies import cf_words, unit_rationals

SQRT5 = math.sqrt(5)


def test_five_eighths():
    cf = cf_expand(mpq(5, 8))
    assert list(cf.entries) == [1, 1, 1, 2]
    assert list(cf.q) == [1, 1, 2, 3, 8]
    assert cf.is_exact and cf.value == mpq(5, 8)


def test_zero_and_unit_fraction():
    zero = cf_expand(0)
    assert zero.entries == () and zero.p == (0,) and zero.q == (1,)
    third = cf_expand(mpq(1, 3))
    assert list(third.entries) == [3] and third.q[1] == 3


def test_rejects_outside_unit_interval():
    with pytest.raises(ValueError):
        cf_expand(1)
    with pytest.raises(ValueError):
        CFState.from_entries([1, 0])


@given(unit_rationals(max_den=2**64))
def test_round_trip_and_recurrences(x):
    cf = cf_expand(x)
    assert cf_value(cf.entries) == x
    for n in range(1, cf.depth + 1):
        # determinant identity q_n p_{n-1} - p_n q_{n-1} = (-1)^n
        assert cf.q[n] * cf.p[n - 1] - cf.p[n] * cf.q[n - 1] == (-1) ** n
        prev2 = (cf.q[n - 2] if n >= 2 else 0)
        assert cf.q[n] == cf.entries[n - 1] * cf.q[n - 1] + prev2
    for n in range(2, cf.depth + 1):
        assert cf.q[n] ** 2 >= mpz(2) ** n


def test_golden_endpoints_give_golden_prefix():
    iv = RatInterval(mpq(61803, 10**5), mpq(61804, 10**5))
    cf = cf_expand_certified(iv)
    assert cf.depth >= 5
    assert list(cf.entries[:5]) == [1, 1, 1, 1, 1]
    assert not cf.is_exact
    assert cf.cylinder.lo <= iv.lo and iv.hi <= cf.cylinder.hi


def test_empty_prefix():
    with pytest.raises(EmptyPrefix):
        cf_expand_certified(RatInterval(mpq(1, 3), mpq(2, 3)))


@given(cf_words)
def test_cylinder_contains_every_extension(word):
    cyl = word_cylinder(word)
    for tail in ([1], [7, 3], [100]):
        assert cyl.contains(cf_value(word + tail))


def test_distance_examples():
    cf = cf_expand(mpq(5, 8))
    assert best_approx_distance(cf, 4).contains(mpq(1, 8))
    assert best_approx_distance(cf, 1) == RatInterval.point(mpq(5, 8))  # q_0 = 1, p_0 = 0


def test_golden_distance_agrees_with_identity():
    cf = CFState.from_entries([1] * 20)
    n = 10
    scaled = best_approx_distance(cf, n) * cf.q[n]
    assert scaled.intersects(identity_rhs(tail_bounds(cf, n)))


def test_tail_bounds_examples():
    cf = CFState.from_entries([1] * 20)
    tb = tail_bounds(cf, 10)
    assert tb.phi == mpq(cf.q[9], cf.q[10])  # F_10 / F_11
    assert tb.theta.lo < (SQRT5 - 1) / 2 < tb.theta.hi
    last = CFState.from_entries([3, 4, 7])
    assert tail_bounds(last, 2).theta == RatInterval(mpq(1, 8), mpq(1, 7))
    silver = CFState.from_entries([2] * 30)
    th = tail_bounds(silver, 12).theta
    assert th.lo < math.sqrt(2) - 1 < th.hi


@given(unit_rationals(max_den=10**15))
def test_identity_exact_for_rationals(x):
    cf = cf_expand(x)
    for n in range(1, cf.depth):
        lhs = cf.q[n] * abs(cf.q[n - 1] * x - cf.p[n - 1])
        rhs = identity_rhs(tail_bounds(cf, n))
        assert rhs.is_point and rhs.lo == lhs


@given(cf_words, st.integers(1, 6))
def test_tail_truncation_only_widens(word, tail):
    cf = CFState.from_entries(word + [1, 2, 3])
    for n in range(1, cf.depth):
        full = best_approx_distance(cf, n)
        coarse = best_approx_distance(cf, n, tail)
        assert coarse.lo <= full.lo and full.hi <= coarse.hi
        c_full = convergent_distance(cf, n)
        c_coarse = convergent_distance(cf, n, tail)
        assert c_coarse.lo <= c_full.lo and c_full.hi <= c_coarse.hi


@given(unit_rationals(max_den=10**9), st.integers(1, 8))
def test_prefix_enclosure_contains_true_distance(x, depth):
    full = cf_expand(x)
    if full.depth <= depth:
        return
    prefix = CFState.from_entries(full.entries[:depth])
    for n in range(1, depth + 1):
        assert best_approx_distance(prefix, n).contains(abs(full.q[n - 1] * x - full.p[n - 1]))


def test_shift_is_gauss_map():
    cf = cf_expand(mpq(5, 8))
    assert cf.shift().value == mpq(3, 5)
    assert list(cf.shift().entries) == [1, 1, 2]
