"""Exact rational intervals and outward-rounded elementary functions.

Every endpoint is a ``gmpy2.mpq``.  Transcendental values (log, exp,
irrational roots) are computed in integer fixed point with floor/ceil at
every step, so the returned interval always contains the true value.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

import gmpy2
from gmpy2 import mpq, mpz

Rational = type(mpq(0))


def rat(x) -> mpq:
    """Coerce int, Fraction, mpq, exact decimal string or ``"p/q"`` to mpq."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return mpq(x.strip())
    if isinstance(x, (int, Fraction, _RationalABC)) or type(x) is type(mpz(0)):
        return mpq(x)
    if isinstance(x, float):
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def floor_rat(x: mpq) -> mpz:
    return x.numerator // x.denominator


def ceil_rat(x: mpq) -> mpz:
    return -((-x.numerator) // x.denominator)


def _log2_estimate(x: mpq) -> int:
    # within 1 of log2|x|
    return x.numerator.bit_length() - x.denominator.bit_length()


def round_down(x: mpq, bits: int) -> mpq:
    """Largest dyadic <= x carrying roughly ``bits`` significant bits."""
    if x == 0:
        return x
    shift = bits - _log2_estimate(x)
    if shift >= 0:
        return mpq((x.numerator << shift) // x.denominator, mpz(1) << shift)
    return mpq((x.numerator // (x.denominator << -shift)) << -shift)


def round_up(x: mpq, bits: int) -> mpq:
    return -round_down(-x, bits)


@dataclass(frozen=True)
class RatInterval:
    lo: mpq
    hi: mpq

    def __post_init__(self):
        lo, hi = rat(self.lo), rat(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RatInterval":
        x = rat(x)
        return cls(x, x)

    @classmethod
    def hull(cls, *items) -> "RatInterval":
        ivs = [as_interval(i) for i in items]
        return cls(min(i.lo for i in ivs), max(i.hi for i in ivs))

    @property
    def width(self) -> mpq:
        return self.hi - self.lo

    @property
    def mid(self) -> mpq:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = rat(x)
        return self.lo <= x <= self.hi

    def intersects(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def rounded(self, bits: int) -> "RatInterval":
        """Outward rounding to dyadic endpoints; keeps integer sizes bounded."""
        return RatInterval(round_down(self.lo, bits), round_up(self.hi, bits))

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __add__(self, other):
        o = as_interval(other)
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_interval(other)
        return RatInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        if not isinstance(other, RatInterval):
            c = rat(other)
            return RatInterval(self.lo * c, self.hi * c) if c >= 0 else RatInterval(self.hi * c, self.lo * c)
        if self.lo >= 0 and other.lo >= 0:
            return RatInterval(self.lo * other.lo, self.hi * other.hi)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RatInterval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"reciprocal of interval containing zero: [{self.lo}, {self.hi}]")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        if not isinstance(other, RatInterval):
            c = rat(other)
            if c == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / c)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return as_interval(other) * self.reciprocal()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RatInterval(0, max(-self.lo, self.hi))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("integer power must be a non-negative int")
        if k == 0:
            return RatInterval.point(1)
        if self.lo >= 0:
            return RatInterval(self.lo ** k, self.hi ** k)
        if self.hi <= 0:
            r = RatInterval((-self.hi) ** k, (-self.lo) ** k)
            return r if k % 2 == 0 else -r
        if k % 2 == 0:
            return RatInterval(0, max(-self.lo, self.hi) ** k)
        return RatInterval(self.lo ** k, self.hi ** k)

    # certified comparisons -------------------------------------------------
    def certainly_lt(self, other) -> bool:
        return self.hi < as_interval(other).lo

    def certainly_le(self, other) -> bool:
        return self.hi <= as_interval(other).lo

    def certainly_gt(self, other) -> bool:
        return self.lo > as_interval(other).hi

    def certainly_ge(self, other) -> bool:
        return self.lo >= as_interval(other).hi

    def __repr__(self):
        return f"RatInterval({self.lo}, {self.hi})"


def as_interval(x) -> RatInterval:
    return x if isinstance(x, RatInterval) else RatInterval.point(x)


def imin(a: RatInterval, b: RatInterval) -> RatInterval:
    return RatInterval(min(a.lo, b.lo), min(a.hi, b.hi))


def imax(a: RatInterval, b: RatInterval) -> RatInterval:
    return RatInterval(max(a.lo, b.lo), max(a.hi, b.hi))


# --------------------------------------------------------------------------
# fixed-point kernels: integers scaled by 2**P, lower and upper tracked apart


def _fix_floor(x: mpq, P: int) -> mpz:
    return (x.numerator << P) // x.denominator


def _fix_ceil(x: mpq, P: int) -> mpz:
    return -((-x.numerator << P) // x.denominator)


def _atanh_fixed(z: mpq, P: int) -> tuple[mpz, mpz]:
    """Bounds on atanh(z) * 2**P for 0 <= z <= 1/3."""
    if z == 0:
        return mpz(0), mpz(0)
    z2 = z * z
    zl, zh = _fix_floor(z, P), _fix_ceil(z, P)
    z2l, z2h = _fix_floor(z2, P), _fix_ceil(z2, P)
    lo = hi = mpz(0)
    pl, ph = zl, zh
    j = 0
    while True:
        lo += pl // (2 * j + 1)
        hi += -((-ph) // (2 * j + 1))
        if ph <= 1:
            break
        pl = (pl * z2l) >> P
        ph = -((-ph * z2h) >> P)
        j += 1
    # remaining terms sum to at most ph / (1 - z^2) <= 9/8 units
    return lo, hi + 2


@lru_cache(maxsize=64)
def _ln2_fixed(P: int) -> tuple[mpz, mpz]:
    lo, hi = _atanh_fixed(mpq(1, 3), P)
    return 2 * lo, 2 * hi


def _log_fixed(x: mpq, P: int) -> tuple[mpz, mpz]:
    e = _log2_estimate(x)
    m = x / (mpq(2) ** e) if e >= 0 else x * (mpq(2) ** -e)
    while m < 1:
        m *= 2
        e -= 1
    while m >= 2:
        m /= 2
        e += 1
    z = (m - 1) / (m + 1)
    al, ah = _atanh_fixed(z, P)
    l2l, l2h = _ln2_fixed(P)
    if e >= 0:
        return 2 * al + e * l2l, 2 * ah + e * l2h
    return 2 * al + e * l2h, 2 * ah + e * l2l


def _log_point(x: mpq, bits: int) -> RatInterval:
    if x <= 0:
        raise ValueError(f"log of non-positive value {x}")
    if x == 1:
        return RatInterval.point(0)
    e = abs(_log2_estimate(x))
    guard = 12 + max(e, 1).bit_length()
    if e <= 1:
        # |log x| can be tiny near 1; add the bits lost to cancellation
        d = abs(x - 1)
        guard += max(0, -_log2_estimate(d)) + 2
    P = bits + guard
    lo, hi = _log_fixed(x, P)
    scale = mpz(1) << P
    return RatInterval(mpq(lo, scale), mpq(hi, scale))


def ilog(x, bits: int = 128) -> RatInterval:
    """Enclosure of the natural log, relative width about 2**-bits."""
    if isinstance(x, RatInterval):
        if x.is_point:
            return _log_point(x.lo, bits)
        return RatInterval(_log_point(x.lo, bits).lo, _log_point(x.hi, bits).hi)
    return _log_point(rat(x), bits)


def ln2(bits: int = 128) -> RatInterval:
    return _log_point(mpq(2), bits)


def _exp_pos(x: mpq, bits: int) -> RatInterval:
    # x > 0; argument halving then Taylor, then repeated squaring
    j = max(0, int(ceil_rat(x)).bit_length()) + 8
    y = x / (mpz(1) << j)
    P = bits + j + 16
    one = mpz(1) << P
    yl, yh = _fix_floor(y, P), _fix_ceil(y, P)
    sl = sh = one
    tl = th = one
    k = 1
    while True:
        tl = (tl * yl) // (k << P)
        th = -((-th * yh) // (k << P))
        sl += tl
        sh += th
        if th <= 1:
            break
        k += 1
    sh += 1
    for _ in range(j):
        sl = (sl * sl) >> P
        sh = -((-sh * sh) >> P)
    return RatInterval(mpq(sl, one), mpq(sh, one))


def _exp_point(x: mpq, bits: int) -> RatInterval:
    if x == 0:
        return RatInterval.point(1)
    if x > 0:
        return _exp_pos(x, bits)
    return _exp_pos(-x, bits).reciprocal()


def iexp(x, bits: int = 128) -> RatInterval:
    """Enclosure of exp, relative width about 2**-bits."""
    if isinstance(x, RatInterval):
        if x.is_point:
            return _exp_point(x.lo, bits)
        return RatInterval(_exp_point(x.lo, bits).lo, _exp_point(x.hi, bits).hi)
    return _exp_point(rat(x), bits)


def _root_point(x: mpq, q: int, bits: int) -> RatInterval:
    """x**(1/q) for x > 0; exact when x is a perfect q-th power."""
    if q == 1:
        return RatInterval.point(x)
    N, D = x.numerator, x.denominator
    rn, en = gmpy2.iroot(N, q)
    rd, ed = gmpy2.iroot(D, q)
    if en and ed:
        return RatInterval.point(mpq(rn, rd))
    M = N * D ** (q - 1)
    P = max(0, bits + 4 - M.bit_length() // q)
    r, exact = gmpy2.iroot(M << (q * P), q)
    den = D << P
    if exact:
        return RatInterval.point(mpq(r, den))
    return RatInterval(mpq(r, den), mpq(r + 1, den))


def _pow_point(x: mpq, k: mpq, bits: int) -> RatInterval:
    if x <= 0:
        raise ValueError(f"rational power of non-positive base {x}")
    if k == 0:
        return RatInterval.point(1)
    p, q = int(k.numerator), int(k.denominator)
    base = x ** abs(p)
    if p < 0:
        base = 1 / base
    return _root_point(base, q, bits)


def ipow(x, k, bits: int = 128) -> RatInterval:
    """Enclosure of x**k for x > 0 and rational k."""
    k = rat(k)
    if isinstance(x, RatInterval):
        if x.is_point:
            return _pow_point(x.lo, k, bits)
        a, b = _pow_point(x.lo, k, bits), _pow_point(x.hi, k, bits)
        return RatInterval(a.lo, b.hi) if k >= 0 else RatInterval(b.lo, a.hi)
    return _pow_point(rat(x), k, bits)


def relative_width_ok(iv: RatInterval, bits: int) -> bool:
    """True when width <= 2**-bits * min(1, smallest magnitude in iv)."""
    if iv.is_point:
        return True
    mag = min(abs(iv.lo), abs(iv.hi))
    if iv.lo <= 0 <= iv.hi:
        mag = mpq(0)
    scale = min(mpq(1), mag) if mag > 0 else mpq(1)
    return iv.width * (mpz(1) << bits) <= scale
