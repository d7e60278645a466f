import math
from fractions import Fraction

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import example, given
from hypothesis import strategies as st

from dirichlet_lab.interval import (
    RatInterval,
    ceil_rat,
    floor_rat,
    iexp,
    ilog,
    ipow,
    ln2,
    rat,
    round_down,
    round_up,
)
from strategies import positive_rationals


@pytest.fixture(autouse=True)
def _oracle_precision():
    with mpmath.workprec(400):
        yield


def _contains(iv: RatInterval, value) -> bool:
    lo = mpmath.mpf(int(iv.lo.numerator)) / int(iv.lo.denominator)
    hi = mpmath.mpf(int(iv.hi.numerator)) / int(iv.hi.denominator)
    # the oracle itself rounds at 400 bits; exact (point) enclosures need that much room
    slack = (abs(value) + 1) * mpmath.mpf(2) ** (20 - mpmath.mp.prec)
    return lo - slack <= value <= hi + slack


def _mp(x):
    x = rat(x)
    return mpmath.mpf(int(x.numerator)) / int(x.denominator)


def test_rat_parsing_and_integer_rounding():
    assert rat("5/8") == mpq(5, 8)
    assert rat(3) == 3
    assert floor_rat(mpq(-1, 2)) == -1
    assert ceil_rat(mpq(7, 2)) == 4


def test_ln2_kernel_against_mpmath():
    for bits in (64, 128, 256):
        iv = ln2(bits)
        assert _contains(iv, mpmath.log(2))
        assert iv.width < mpq(1, 2 ** (bits - 2))


@given(positive_rationals(lo=1, hi=10**9))
def test_log_kernel_encloses_mpmath(x):
    iv = ilog(x, 128)
    assert _contains(iv, mpmath.log(_mp(x)))
    assert iv.width <= mpq(1, 2 ** 100) * max(1, abs(iv.hi))


@given(st.fractions(min_value=-60, max_value=60, max_denominator=1000))
def test_exp_kernel_encloses_mpmath(f):
    x = mpq(f.numerator, f.denominator)
    iv = iexp(x, 128)
    assert _contains(iv, mpmath.exp(_mp(x)))
    assert iv.lo > 0


@given(positive_rationals(lo=1, hi=10**6),
       st.fractions(min_value=-3, max_value=3, max_denominator=8))
@example(mpq(25, 3), Fraction(-1))
def test_pow_kernel_encloses_mpmath(x, k):
    k = mpq(k.numerator, k.denominator)
    iv = ipow(x, k, 128)
    assert _contains(iv, mpmath.power(_mp(x), _mp(k)))


def test_exact_cases_stay_exact():
    assert ilog(1, 128) == RatInterval.point(0)
    assert iexp(0, 128) == RatInterval.point(1)
    assert ipow(mpq(9, 4), mpq(1, 2), 64) == RatInterval.point(mpq(3, 2))


def test_interval_of_interval_argument_is_monotone_hull():
    iv = ilog(RatInterval(2, 3), 96)
    assert _contains(iv, mpmath.log(2)) and _contains(iv, mpmath.log(3))


@given(st.integers(-10**30, 10**30), st.integers(1, 10**30), st.integers(8, 200))
def test_rounding_is_directed(num, den, bits):
    x = mpq(num, den)
    assert round_down(x, bits) <= x <= round_up(x, bits)


@given(st.lists(st.fractions(-100, 100, max_denominator=100), min_size=4, max_size=4))
def test_arithmetic_contains_pointwise_results(vals):
    a, b, c, d = (mpq(v.numerator, v.denominator) for v in vals)
    x = RatInterval(min(a, b), max(a, b))
    y = RatInterval(min(c, d), max(c, d))
    for u in (x.lo, x.hi, x.mid):
        for v in (y.lo, y.hi, y.mid):
            assert (x + y).contains(u + v)
            assert (x - y).contains(u - v)
            assert (x * y).contains(u * v)
            if not y.contains(0):
                assert (x / y).contains(u / v)


def test_reciprocal_rejects_zero():
    with pytest.raises(ZeroDivisionError):
        RatInterval(-1, 1).reciprocal()


def test_malformed_interval_rejected():
    with pytest.raises(ValueError):
        RatInterval(2, 1)


def test_log_rejects_nonpositive():
    with pytest.raises(ValueError):
        ilog(0)
    assert math.isfinite(float(ilog(mpq(1, 10**40)).mid))
