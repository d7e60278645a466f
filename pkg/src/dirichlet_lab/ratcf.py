"""Continued-fraction engine in Khintchine indexing (q_0 = 1, q_1 = a_1).

A :class:`CFState` is either the complete expansion of a rational (``value``
is set) or a finite prefix standing for every real in its cylinder.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq, mpz

from .errors import EmptyPrefix
from .interval import RatInterval, rat


def convergents(entries: Sequence[int]) -> tuple[tuple[mpz, ...], tuple[mpz, ...]]:
    """Return (p_0..p_k), (q_0..q_k) from the three-term recurrence."""
    p_prev, p = mpz(1), mpz(0)
    q_prev, q = mpz(0), mpz(1)
    ps, qs = [p], [q]
    for a in entries:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        ps.append(p)
        qs.append(q)
    return tuple(ps), tuple(qs)


def cf_value(entries: Sequence[int]) -> mpq:
    """The rational [a_1, ..., a_k] (0 for the empty word)."""
    ps, qs = convergents(entries)
    return mpq(ps[-1], qs[-1])


def word_cylinder(entries: Sequence[int]) -> RatInterval:
    """Closed interval of all x in [0, 1] whose expansion starts with ``entries``."""
    ps, qs = convergents(entries)
    if not entries:
        return RatInterval(0, 1)
    a = mpq(ps[-1], qs[-1])
    b = mpq(ps[-1] + ps[-2], qs[-1] + qs[-2])
    return RatInterval(min(a, b), max(a, b))


@dataclass(frozen=True)
class CFState:
    entries: tuple[int, ...]
    p: tuple[mpz, ...] = field(repr=False)
    q: tuple[mpz, ...] = field(repr=False)
    value: mpq | None = None

    @classmethod
    def from_entries(cls, entries: Sequence[int], value=None) -> "CFState":
        entries = tuple(mpz(a) for a in entries)
        if any(a < 1 for a in entries):
            raise ValueError("continued-fraction entries must be positive integers")
        ps, qs = convergents(entries)
        if value is not None:
            value = rat(value)
            if value != mpq(ps[-1], qs[-1]):
                raise ValueError("value does not match the entries")
        return cls(entries, ps, qs, value)

    @property
    def depth(self) -> int:
        return len(self.entries)

    @property
    def is_exact(self) -> bool:
        return self.value is not None

    @property
    def cylinder(self) -> RatInterval:
        k = self.depth
        if k == 0:
            return RatInterval(0, 1)
        a = mpq(self.p[k], self.q[k])
        b = mpq(self.p[k] + self.p[k - 1], self.q[k] + self.q[k - 1])
        return RatInterval(min(a, b), max(a, b))

    def a(self, n: int) -> mpz:
        """Entry a_n, 1-based."""
        return self.entries[n - 1]

    def shift(self) -> "CFState":
        """Gauss-map image: drop the first entry."""
        if not self.entries:
            raise ValueError("cannot shift the empty expansion")
        value = None
        if self.value is not None:
            value = 1 / self.value - self.entries[0]
        return CFState.from_entries(self.entries[1:], value)


def cf_expand(x, max_depth: int = 10**9) -> CFState:
    """Euclidean expansion of a rational 0 <= x < 1.

    The result is exact (``value`` set) when the algorithm terminates within
    ``max_depth`` steps; otherwise it is the depth-``max_depth`` prefix.
    """
    x = rat(x)
    if not 0 <= x < 1:
        raise ValueError(f"cf_expand needs 0 <= x < 1, got {x}")
    num, den = x.numerator, x.denominator
    entries = []
    while num != 0 and len(entries) < max_depth:
        a, r = divmod(den, num)
        entries.append(a)
        num, den = r, num
    return CFState.from_entries(entries, x if num == 0 else None)


def _entries_of(x: mpq, max_depth: int) -> list[mpz]:
    num, den = x.numerator, x.denominator
    out = []
    while num != 0 and len(out) < max_depth:
        a, r = divmod(den, num)
        out.append(a)
        num, den = r, num
    return out


def cf_expand_certified(x: RatInterval, max_depth: int = 10**9) -> CFState:
    """Longest prefix shared by every real in ``x`` (via the two endpoints)."""
    if not (0 <= x.lo < x.hi < 1):
        raise ValueError(f"need 0 <= lo < hi < 1, got [{x.lo}, {x.hi}]")
    lo = _entries_of(x.lo, max_depth)
    hi = _entries_of(x.hi, max_depth)
    common = []
    for a, b in zip(lo, hi):
        if a != b:
            break
        common.append(a)
    if not common:
        raise EmptyPrefix(f"endpoints {x.lo} and {x.hi} disagree at the first entry")
    return CFState.from_entries(common)


def _distance_at(cf: CFState, j: int, x: mpq) -> mpq:
    return abs(cf.q[j] * x - cf.p[j])


def _distance_over_cylinder(cf: CFState, j: int) -> RatInterval:
    """|q_j x - p_j| over the closed depth-k cylinder, evaluated at both endpoints."""
    k = cf.depth
    if cf.value is not None:
        return RatInterval.point(_distance_at(cf, j, cf.value))
    # endpoint x = p_k / q_k and x' = (p_k + p_{k-1}) / (q_k + q_{k-1})
    num1 = abs(cf.q[j] * cf.p[k] - cf.p[j] * cf.q[k])
    num2 = abs(cf.q[j] * (cf.p[k] + cf.p[k - 1]) - cf.p[j] * (cf.q[k] + cf.q[k - 1]))
    d1 = mpq(num1, cf.q[k])
    d2 = mpq(num2, cf.q[k] + cf.q[k - 1])
    return RatInterval(min(d1, d2), max(d1, d2))


def _distance_from_tail(cf: CFState, n: int, tail: int) -> RatInterval:
    """1 / (q_n + theta q_{n-1}) with theta over the cylinder of the next ``tail`` entries.

    Using fewer entries only widens the theta range, so the result still
    encloses the distance for every x in the cylinder; its size is set by
    q_n instead of q_k, which matters for very deep prefixes.
    """
    theta = word_cylinder(cf.entries[n:n + tail])
    q, qp = cf.q[n], cf.q[n - 1]
    return RatInterval(1 / (q + theta.hi * qp), 1 / (q + theta.lo * qp))


def best_approx_distance(cf: CFState, n: int, tail: int | None = None) -> RatInterval:
    """Enclosure of |q_{n-1} x - p_{n-1}| for every x described by ``cf``.

    For n >= 2 this is the nearest-integer distance of q_{n-1} x.  At n = 1
    it is x itself (p_0 = 0), the quantity appearing in the q_n identity.
    ``tail`` caps how many later entries are used (coarser but cheaper);
    the default uses the whole prefix.
    """
    if not 1 <= n <= cf.depth:
        raise IndexError(f"n = {n} outside 1..{cf.depth}")
    if tail is not None and cf.value is None and n + tail < cf.depth:
        return _distance_from_tail(cf, n, tail)
    return _distance_over_cylinder(cf, n - 1)


def convergent_distance(cf: CFState, n: int, tail: int | None = None) -> RatInterval:
    """Enclosure of |q_n x - p_n| for 0 <= n <= depth."""
    if not 0 <= n <= cf.depth:
        raise IndexError(f"n = {n} outside 0..{cf.depth}")
    if cf.value is not None and n == cf.depth:
        return RatInterval.point(0)
    if tail is not None and cf.value is None and n + 1 + tail < cf.depth:
        return _distance_from_tail(cf, n + 1, tail)
    return _distance_over_cylinder(cf, n)


@dataclass(frozen=True)
class TailBounds:
    theta: RatInterval
    phi: mpq


def tail_bounds(cf: CFState, n: int) -> TailBounds:
    """theta_{n+1} = [a_{n+1}, ...] (enclosed) and phi_n = [a_n, ..., a_1] (exact)."""
    k = cf.depth
    if not 1 <= n < k:
        raise IndexError(f"n = {n} outside 1..{k - 1}")
    phi = mpq(cf.q[n - 1], cf.q[n])
    rest = cf.entries[n:]
    if cf.value is not None:
        theta = RatInterval.point(cf_value(rest))
    else:
        theta = word_cylinder(rest)
    return TailBounds(theta, phi)


def identity_rhs(tb: TailBounds) -> RatInterval:
    """(1 + theta * phi)^-1, decreasing in theta."""
    return RatInterval(1 / (1 + tb.theta.hi * tb.phi), 1 / (1 + tb.theta.lo * tb.phi))
