"""Lattice side: the Dani change of variables, unimodular lattices under the
diagonal flow, shortest sup-norm vectors, and three-way cross-validation.

Vectors of the lattice attached to an m x n matrix Y are
(z_top + Y z_bot, z_bot) for integer z; the flow multiplies the first m
coordinates by e^{s/m} and the last n by e^{-s/n}.  Norm comparisons are
made in log space so that rational inputs stay exact where possible.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq, mpz

from .classify import ClassificationReport, Status, compare, dirichlet_verdicts, summarize
from .errors import BelowS0, InconsistencyFound, OutOfDomain, PrecisionExhausted
from .interval import RatInterval, ceil_rat, floor_rat, iexp, ilog, imax, rat
from .psi import PsiFunction, fmt_rat
from .ratcf import CFState, best_approx_distance, cf_expand

DIMENSION_CAP = 5
ENUMERATION_CAP = 2_000_000


# ---------------------------------------------------------------------------
# matrices


def as_matrix(Y, m: int | None = None, n: int | None = None) -> tuple[tuple[mpq, ...], ...]:
    """Coerce a scalar, flat row-major list or nested list into an m x n rational matrix."""
    if not isinstance(Y, (list, tuple)):
        rows = ((rat(Y),),)
    elif Y and isinstance(Y[0], (list, tuple)):
        rows = tuple(tuple(rat(v) for v in row) for row in Y)
    else:
        if m is None or n is None:
            raise ValueError("a flat matrix needs explicit dimensions")
        flat = [rat(v) for v in Y]
        if len(flat) != m * n:
            raise ValueError(f"expected {m * n} entries, got {len(flat)}")
        rows = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(m))
    if len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix")
    if m is not None and len(rows) != m or n is not None and len(rows[0]) != n:
        raise ValueError("matrix shape does not match the given dimensions")
    return rows


def _dims(Y, cap: int) -> tuple[int, int]:
    m, n = len(Y), len(Y[0])
    if m + n > cap:
        raise ValueError(f"m + n = {m + n} exceeds the dimension cap {cap}")
    return m, n


def _mat_inverse(A: list[list[mpq]]) -> list[list[mpq]]:
    d = len(A)
    M = [[mpq(x) for x in row] + [mpq(int(i == j)) for j in range(d)] for i, row in enumerate(A)]
    for col in range(d):
        piv = next(r for r in range(col, d) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(d):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[d:] for row in M]


def _interval_det(M: list[list[RatInterval]]) -> RatInterval:
    d = len(M)
    if d == 1:
        return M[0][0]
    total = RatInterval.point(0)
    for j in range(d):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _interval_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


@dataclass(frozen=True)
class FlowedBasis:
    s: mpq
    entries: tuple[tuple[RatInterval, ...], ...]  # columns are the flowed basis vectors
    det: RatInterval


def flowed_basis(Y, s, bits: int = 128, cap: int = DIMENSION_CAP) -> FlowedBasis:
    Y = as_matrix(Y)
    m, n = _dims(Y, cap)
    s = rat(s)
    up, down = iexp(s / m, bits), iexp(-s / n, bits)
    d = m + n
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            if i < m:
                raw = mpq(int(i == j)) if j < m else Y[i][j - m]
                row.append(up * raw)
            else:
                row.append(down * mpq(int(i == j)))
        rows.append(row)
    return FlowedBasis(s, tuple(tuple(r) for r in rows), _interval_det(rows))


# ---------------------------------------------------------------------------
# exact LLL


def lll_reduce(rows: list[list[int]], delta: mpq = mpq(3, 4)) -> tuple[list[list[mpz]], list[list[mpz]]]:
    """LLL on integer row vectors; returns (reduced rows, unimodular U with reduced = U * rows)."""
    b = [[mpz(x) for x in r] for r in rows]
    d = len(b)
    U = [[mpz(int(i == j)) for j in range(d)] for i in range(d)]

    def gram_schmidt():
        bs, mu = [], [[mpq(0)] * d for _ in range(d)]
        norms = []
        for i in range(d):
            v = [mpq(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = sum((mpq(x) * y for x, y in zip(b[i], bs[j])), mpq(0)) / norms[j]
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
            norms.append(sum((x * x for x in v), mpq(0)))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < d:
        for j in range(k - 1, -1, -1):
            qf = mu[k][j]
            r = floor_rat(qf + mpq(1, 2))
            if r:
                b[k] = [x - r * y for x, y in zip(b[k], b[j])]
                U[k] = [x - r * y for x, y in zip(U[k], U[j])]
                mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return b, U


# ---------------------------------------------------------------------------
# Delta


@dataclass(frozen=True)
class DeltaValue:
    enclosure: RatInterval
    minimizer: tuple[int, ...]  # integer coordinates z of a shortest vector
    candidates: int


def _log_norm(s: mpq, m: int, n: int, dtop: mpq, dbot: mpz, bits: int) -> RatInterval:
    """log of max(e^{s/m} dtop, e^{-s/n} dbot) for a nonzero vector."""
    parts = []
    if dtop > 0:
        parts.append(s / m + ilog(dtop, bits))
    if dbot > 0:
        parts.append(-s / n + ilog(mpq(dbot), bits))
    out = parts[0]
    for p in parts[1:]:
        out = imax(out, p)
    return out


def _vector_extents(Y, m: int, n: int, z: Sequence) -> tuple[mpq, mpz]:
    top = z[:m]
    bot = z[m:]
    dtop = max(abs(top[i] + sum((Y[i][j] * bot[j] for j in range(n)), mpq(0))) for i in range(m))
    dbot = max(abs(x) for x in bot)
    return dtop, mpz(dbot)


def delta(Y, s, bits: int = 128, cap: int = DIMENSION_CAP,
          enumeration_cap: int = ENUMERATION_CAP) -> DeltaValue:
    """Certified enclosure of minus the log of the shortest sup-norm vector of g_s Lambda_Y."""
    Y = as_matrix(Y)
    m, n = _dims(Y, cap)
    d = m + n
    s = rat(s)
    # integer approximation of the flowed basis, scaled so every entry is large
    P = 64 + max(0, int(math.ceil(abs(float(s)) / math.log(2))) + 2)
    up, down = iexp(s / m, bits + P), iexp(-s / n, bits + P)
    scale = mpz(1) << P
    E_up = floor_rat(up.mid * scale)
    E_down = floor_rat(down.mid * scale)
    rows = []
    for j in range(d):  # basis vector j as a row
        v = [mpz(0)] * d
        if j < m:
            v[j] = E_up
        else:
            for i in range(m):
                v[i] = floor_rat(Y[i][j - m] * E_up + mpq(1, 2))
            v[j] = E_down
        rows.append(v)
    _, U = lll_reduce(rows)
    # z of the reduced vectors are the rows of U; any z equals U^T c, so c = (U^T)^{-1} z
    UT_inv = _mat_inverse([[mpq(U[j][i]) for j in range(d)] for i in range(d)])
    MY_inv = [[mpq(int(i == j)) for j in range(d)] for i in range(d)]
    for i in range(m):
        for j in range(n):
            MY_inv[i][m + j] = -Y[i][j]
    A = [[sum((UT_inv[i][l] * MY_inv[l][k] for l in range(d)), mpq(0)) for k in range(d)]
         for i in range(d)]
    g_inv = [iexp(-s / m, bits).hi] * m + [iexp(s / n, bits).hi] * n

    def norm_bounds(z):
        dtop, dbot = _vector_extents(Y, m, n, z)
        lo = max(up.lo * dtop, down.lo * dbot)
        hi = max(up.hi * dtop, down.hi * dbot)
        return lo, hi, dtop, dbot

    # radius: best reduced vector, never above the Minkowski bound 1
    R = mpq(1)
    for i in range(d):
        R = min(R, norm_bounds(U[i])[1])
    box = [int(floor_rat(R * sum((abs(A[i][k]) * g_inv[k] for k in range(d)), mpq(0))))
           for i in range(d)]
    count = 1
    for bnd in box:
        count *= 2 * bnd + 1
    if count > enumeration_cap:
        raise PrecisionExhausted(f"enumeration box of {count} points exceeds the cap")

    best_hi = None
    survivors = []
    for c in itertools.product(*(range(-bnd, bnd + 1) for bnd in box)):
        first = next((x for x in c if x), 0)
        if first <= 0:
            continue  # zero vector, or the mirror of a vector already seen
        z = [sum((U[i][j] * c[i] for i in range(d)), mpz(0)) for j in range(d)]
        lo, hi, dtop, dbot = norm_bounds(z)
        if best_hi is not None and lo > best_hi:
            continue
        if best_hi is None or hi < best_hi:
            best_hi = hi
        survivors.append((lo, z, dtop, dbot))
    best = None
    arg = None
    for lo, z, dtop, dbot in survivors:
        if lo > best_hi:
            continue
        ln = _log_norm(s, m, n, dtop, dbot, bits)
        if best is None:
            best, arg = ln, z
        else:
            if ln.hi < best.hi:
                arg = z
            best = RatInterval(min(best.lo, ln.lo), min(best.hi, ln.hi))
    return DeltaValue(-best, tuple(int(x) for x in arg), len(survivors))


# ---------------------------------------------------------------------------
# Dani correspondence


def s0_enclosure(psi: PsiFunction, m: int, n: int, bits: int = 128) -> RatInterval:
    """(m log t0 - n log psi(t0)) / (m + n): the s at which t = t0."""
    t0 = psi.t0
    return (m * ilog(t0, bits) - n * ilog(psi.eval(t0, bits), bits)) / (m + n)


def _dani_F(psi: PsiFunction, m: int, n: int, s: mpq, r: mpq, bits: int) -> RatInterval:
    """log psi(e^{s - n r}) + s + m r, increasing in r."""
    T = iexp(s - n * r, bits)
    if T.hi < psi.t0:
        raise OutOfDomain("flow time below the domain of psi")
    T = RatInterval(max(T.lo, psi.t0), T.hi)
    val = psi.eval_interval(T, bits)
    if val.lo <= 0:
        raise OutOfDomain("psi vanishes on the queried range")
    return ilog(val, bits) + s + m * r


def _float_root(psi: PsiFunction, m: int, n: int, s: float, lo: float, hi: float) -> float | None:
    def F(r):
        return math.log(float(psi.approx(math.exp(s - n * r)))) + s + m * r

    try:
        if F(lo) > 0 or F(hi) < 0:
            return None
        for _ in range(80):
            mid = (lo + hi) / 2
            if F(mid) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2
    except (ValueError, OverflowError, ZeroDivisionError):
        return None


def dani_r(psi: PsiFunction, m: int, n: int, s, tol_bits: int = 64) -> RatInterval:
    """Enclosure (width <= 2**-tol_bits) of the r solving psi(e^{s-nr}) = e^{-s-mr}."""
    s = rat(s)
    bits = tol_bits + 48
    s0 = s0_enclosure(psi, m, n, bits)
    if s < s0.hi:
        raise BelowS0(f"s = {float(s):.6g} is below s0 = {float(s0.mid):.6g}")
    r_max = (s - ilog(psi.t0, bits)) / n
    hi = r_max.lo
    F_hi = _dani_F(psi, m, n, s, hi, bits)
    if F_hi.hi <= 0:
        # root sits in the sliver [r_max.lo, r_max.hi]
        return RatInterval(hi, r_max.hi)
    step = mpq(1)
    lo = hi - step
    while _dani_F(psi, m, n, s, lo, bits).hi >= 0:
        step *= 2
        lo = hi - step
    tol = mpq(1, 1 << tol_bits)
    guess = _float_root(psi, m, n, float(s), float(lo), float(hi))
    if guess is not None:
        g = rat(guess)
        for eps in (mpq(1, 1 << 30), mpq(1, 1 << 16)):
            a, b = max(lo, g - eps), min(hi, g + eps)
            if _dani_F(psi, m, n, s, a, bits).hi < 0 and _dani_F(psi, m, n, s, b, bits).lo > 0:
                lo, hi = a, b
                break
    while hi - lo > tol:
        mid = (lo + hi) / 2
        # keep endpoints dyadic and short
        mid = mpq(floor_rat(mid * (1 << (tol_bits + 2))), 1 << (tol_bits + 2))
        if mid <= lo or mid >= hi:
            break
        Fm = _dani_F(psi, m, n, s, mid, bits)
        if Fm.lo > 0:
            hi = mid
        elif Fm.hi < 0:
            lo = mid
        else:
            # the root is (numerically) at mid: bracket it tightly around mid
            eps = tol / 4
            if (_dani_F(psi, m, n, s, mid - eps, bits).hi < 0
                    and _dani_F(psi, m, n, s, mid + eps, bits).lo > 0):
                return RatInterval(mid - eps, mid + eps)
            bits *= 2
    return RatInterval(lo, hi)


def dani_time(psi: PsiFunction, m: int, n: int, s, r: RatInterval, bits: int = 128) -> RatInterval:
    """t = e^{s - n r} for r in the enclosure."""
    s = rat(s)
    return RatInterval(iexp(s - n * r.hi, bits).lo, iexp(s - n * r.lo, bits).hi)


def s_for_time(psi: PsiFunction, m: int, n: int, t, bits: int = 128) -> RatInterval:
    """The s whose Dani time is t: (m log t - n log psi(t)) / (m + n)."""
    t = rat(t)
    return (m * ilog(t, bits) - n * ilog(psi.eval(t, bits), bits)) / (m + n)


@dataclass(frozen=True)
class MonotonicitySpotCheck:
    s_grid: tuple[mpq, ...]
    time_increasing: bool  # s - n r(s)
    level_nondecreasing: bool  # s + m r(s)


def dani_spot_check(psi: PsiFunction, m: int, n: int, s_grid, tol_bits: int = 64) -> MonotonicitySpotCheck:
    grid = [rat(s) for s in s_grid]
    rs = [dani_r(psi, m, n, s, tol_bits) for s in grid]
    times = [RatInterval(s - n * r.hi, s - n * r.lo) for s, r in zip(grid, rs)]
    levels = [RatInterval(s + m * r.lo, s + m * r.hi) for s, r in zip(grid, rs)]
    inc = not any(b.hi <= a.lo for a, b in zip(times, times[1:]))
    nd = not any(b.hi < a.lo for a, b in zip(levels, levels[1:]))
    return MonotonicitySpotCheck(tuple(grid), inc, nd)


# ---------------------------------------------------------------------------
# dynamical verdicts


@dataclass(frozen=True)
class DynamicalVerdict:
    n: int  # position in the grid
    s: mpq
    status: Status
    delta: RatInterval
    r: RatInterval


@dataclass(frozen=True)
class DynamicalReport:
    verdicts: tuple[DynamicalVerdict, ...]
    summary: object


def dynamical_verdict(Y, psi: PsiFunction, s, bits: int = 128, retries: int = 3,
                      index: int = 0) -> DynamicalVerdict:
    Y = as_matrix(Y)
    m, n = len(Y), len(Y[0])
    s = rat(s)
    b = bits
    for _ in range(retries + 1):
        dv = delta(Y, s, b).enclosure
        r = dani_r(psi, m, n, s, b // 2 + 8)
        if dv.lo > r.hi:
            status = Status.SATISFIED
        elif dv.hi <= r.lo:
            status = Status.VIOLATED
        else:
            status = Status.INDETERMINATE
            b *= 2
            continue
        break
    return DynamicalVerdict(index, s, status, dv, r)


def dynamical_verdicts(Y, psi: PsiFunction, s_grid, bits: int = 128, retries: int = 3) -> DynamicalReport:
    grid = [rat(s) for s in s_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("s grid must be strictly increasing")
    out = [dynamical_verdict(Y, psi, s, bits, retries, i) for i, s in enumerate(grid)]
    return DynamicalReport(tuple(out), summarize(out))


def geometric_s_grid(psi: PsiFunction, m: int, n: int, count: int, ratio=mpq(5, 4),
                     bits: int = 128) -> list[mpq]:
    s0 = s0_enclosure(psi, m, n, bits).hi
    start = max(mpq(1), ceil_rat(s0 * 16) / 16 + mpq(1, 16))
    out = [start]
    for _ in range(count - 1):
        out.append(mpq(ceil_rat(out[-1] * ratio * 64), 64))
    return out


# ---------------------------------------------------------------------------
# direct witness intervals


@dataclass(frozen=True)
class WitnessInterval:
    q: tuple[int, ...]
    left: mpq  # open left end ||q||^n (exact)
    right_inner: mpq | None  # certified inside (None: unbounded)
    right_outer: mpq | None  # certified outside (None: unbounded)
    r_q: mpq


@dataclass(frozen=True)
class WitnessReport:
    horizon: tuple[mpq, mpq]
    covered: bool
    possible_gaps: tuple[tuple[mpq, mpq], ...]  # not certified covered
    certain_gaps: tuple[tuple[mpq, mpq], ...]  # certified uncovered
    intervals: tuple[WitnessInterval, ...] = field(repr=False)


def _nearest_distance(v: mpq) -> mpq:
    f = v - floor_rat(v)
    return min(f, 1 - f)


def _right_endpoint(psi: PsiFunction, r_q: mpq, left: mpq, limit: mpq,
                    bits: int) -> tuple[mpq | None, mpq | None]:
    """Bounds on R = sup{t >= max(left, t0) : psi(t) > r_q}.

    Returns (inside, outside): psi(inside) > r_q and psi(outside) <= r_q are
    both certified; inside is None when no point is certified inside, and
    outside is None when psi stays above r_q past ``limit``.
    """
    base = max(left, psi.t0)
    at_base = psi.eval(base, bits)
    if at_base.hi <= r_q:
        return None, base
    hi = max(2 * base, base + 1)
    while psi.eval(hi, bits).hi > r_q:
        if hi > limit and psi.eval(hi, bits).lo > r_q:
            return hi, None
        hi *= 2
        if hi > (limit + 1) * (1 << 64):
            return None, None
    if at_base.lo <= r_q:
        return None, hi
    lo = base
    tol = max(mpq(1, 1 << 40), hi / (1 << 64))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if mid.denominator > (1 << 80):
            mid = mpq(floor_rat(mid * (1 << 80)), 1 << 80)
            if not lo < mid < hi:
                break
        val = psi.eval(mid, bits)
        if val.lo > r_q:
            lo = mid
        elif val.hi <= r_q:
            hi = mid
        else:
            break
    # exact crossings (e.g. psi = c/t at a rational level) sit on simple rationals
    snap = Fraction(int(lo.numerator), int(lo.denominator)).limit_denominator(1 << 20)
    snap = mpq(snap.numerator, snap.denominator)
    for cand in (snap, floor_rat(hi), ceil_rat(lo)):
        cand = mpq(cand)
        if lo < cand < hi or cand == hi:
            if psi.eval(cand, bits).hi <= r_q:
                hi = cand
                break
    return lo, hi


def _candidate_qs(Y, m: int, n: int, psi: PsiFunction, T1: mpq,
                  limit: int = ENUMERATION_CAP) -> list[tuple[int, ...]]:
    """Integer vectors q (one per +/- pair) that can be witnesses below T1.

    For n = 1, q is dropped only when max <(Yq)_i>^m >= 2 psi(q) (float psi,
    2x slack): such q can never satisfy the system at any t > q.  Residues
    are exact for word-sized denominators and float otherwise, with the
    float error subtracted before the test.
    """
    side = int(math.floor(float(T1) ** (1 / n))) + 1
    if (2 * side + 1) ** n > 2 * limit:
        raise ValueError(f"horizon {fmt_rat(T1)} needs about {(2 * side + 1) ** n // 2} "
                         f"candidates (cap {limit})")
    if n == 1:
        qmax = int(ceil_rat(T1)) - 1  # ||q|| < T1
        if qmax < 1:
            return []
        q = np.arange(1, qmax + 1, dtype=np.int64)
        worst = np.zeros(len(q))
        slack = 0.0
        for c in (Y[i][0] for i in range(m)):
            num, den = int(c.numerator) % int(c.denominator), int(c.denominator)
            if den < (1 << 31) and qmax < (1 << 31):
                res = (q * num) % den
                dist = np.minimum(res, den - res).astype(np.float64) / den
            else:
                # float fractional parts; error below qmax * 2^-52 plus rounding
                frac = np.mod(q.astype(np.float64) * (num / den), 1.0)
                dist = np.minimum(frac, 1.0 - frac)
                slack = max(slack, qmax * 2.0 ** -50 + 2.0 ** -50)
            worst = np.maximum(worst, dist)
        at = np.maximum(q.astype(np.float64), float(psi.t0))
        keep = np.maximum(worst - slack, 0.0) ** m < 2 * np.asarray(psi.approx(at), dtype=np.float64)
        return [(int(v),) for v in q[keep]]
    out = []
    for q in itertools.product(range(-side, side + 1), repeat=n):
        first = next((x for x in q if x), 0)
        if first > 0 and max(abs(x) for x in q) ** n < T1:
            out.append(q)
    return out


def _uncovered(intervals, T0: mpq, T1: mpq) -> list[tuple[mpq, mpq]]:
    """Closed pieces of [T0, T1] missed by a union of open intervals (l, r); r None = infinity."""
    ivs = sorted(intervals, key=lambda p: p[0])
    gaps: list[list[mpq]] = []
    cur, incl, i, reach = T0, False, 0, None
    while True:
        while i < len(ivs) and (ivs[i][0] < cur or (incl and ivs[i][0] == cur)):
            r = ivs[i][1]
            reach = "inf" if r is None or reach == "inf" else (r if reach is None else max(reach, r))
            i += 1
        if reach == "inf":
            break
        if reach is not None and reach > cur:
            cur, incl = reach, False
            if cur > T1:
                break
            continue
        nxt = ivs[i][0] if i < len(ivs) else None
        end = T1 if nxt is None or nxt > T1 else nxt
        if gaps and gaps[-1][1] >= cur:
            gaps[-1][1] = max(gaps[-1][1], end)
        else:
            gaps.append([cur, end])
        if end == T1 and (nxt is None or nxt >= T1):
            break
        cur, incl = nxt, True
    return [(a, b) for a, b in gaps]


def direct_witness_check(Y, psi: PsiFunction, horizon, bits: int = 128,
                         cap: int = DIMENSION_CAP,
                         enumeration_cap: int = ENUMERATION_CAP) -> WitnessReport:
    """Cover [T0, T1] by the time intervals in which a fixed q solves the system."""
    Y = as_matrix(Y)
    m, n = _dims(Y, cap)
    T0, T1 = rat(horizon[0]), rat(horizon[1])
    if T0 < psi.t0 or T1 < T0:
        raise ValueError("horizon must satisfy t0 <= T0 <= T1")
    ivs = []
    for q in _candidate_qs(Y, m, n, psi, T1, enumeration_cap):
        left = mpq(max(abs(x) for x in q)) ** n
        dist = max(_nearest_distance(sum((Y[i][j] * q[j] for j in range(n)), mpq(0)))
                   for i in range(m))
        r_q = dist ** m
        if r_q == 0:
            inside = outside = None
        else:
            inside, outside = _right_endpoint(psi, r_q, left, T1, bits)
        ivs.append(WitnessInterval(tuple(q), left, inside, outside, r_q))
    inner = [(w.left, None if w.r_q == 0 else w.right_inner) for w in ivs
             if w.r_q == 0 or (w.right_inner is not None and w.right_inner > w.left)]
    outer = [(w.left, w.right_outer) for w in ivs]
    possible = _uncovered(inner, T0, T1)
    certain = _uncovered(outer, T0, T1)
    return WitnessReport((T0, T1), not possible, tuple(possible), tuple(certain), tuple(ivs))


def witness_status(report: WitnessReport, t: RatInterval) -> Status:
    """Satisfied if all of t is certified covered, Violated if certified uncovered."""
    if t.lo < report.horizon[0] or t.hi > report.horizon[1]:
        return Status.INDETERMINATE
    for a, b in report.certain_gaps:
        if a <= t.lo and t.hi <= b:
            return Status.VIOLATED
    for a, b in report.possible_gaps:
        if not (t.hi < a or t.lo > b):
            return Status.INDETERMINATE
    return Status.SATISFIED


# ---------------------------------------------------------------------------
# cross-validation (m = n = 1)


@dataclass(frozen=True)
class CrossPoint:
    s: mpq
    t: RatInterval
    target_index: int  # n with t close to q_n
    side: str  # "below" or "above" q_n
    lattice: Status
    cf_time: Status
    witness: Status
    delta: RatInterval
    r: RatInterval


@dataclass(frozen=True)
class CrossReport:
    Y: mpq
    window: tuple[int, int]
    index_report: ClassificationReport
    points: tuple[CrossPoint, ...]
    witness: WitnessReport
    contradictions: tuple[str, ...]

    @property
    def consistent(self) -> bool:
        return not self.contradictions


def _cf_time_status(cf: CFState, psi: PsiFunction, t: RatInterval, bits: int) -> Status:
    """Is there q < t with <q x> < psi(t)?  The best such q is the last q_j below t."""
    k = cf.depth
    js = [j for j in range(k + 1) if cf.q[j] < t.lo]
    if not js:
        return Status.INDETERMINATE
    j = js[-1]
    if j < k and cf.q[j + 1] < t.hi:
        return Status.INDETERMINATE  # t straddles a denominator
    if j == k:
        if not cf.is_exact:
            return Status.INDETERMINATE
        return Status.SATISFIED  # q_k x is an integer
    lhs = best_approx_distance(cf, j + 1)
    if j == 0:
        lhs = RatInterval(min(lhs.lo, 1 - lhs.hi), min(lhs.hi, 1 - lhs.lo)) if lhs.hi <= 1 else lhs
    return compare(lhs, psi.eval_interval(t, bits))


def _grid_point(psi: PsiFunction, t: mpq, bits: int) -> mpq:
    # a short rational s whose Dani time is within ~2^-bits of t
    enc = s_for_time(psi, 1, 1, t, bits + 16)
    return mpq(floor_rat(enc.mid * (1 << bits)), 1 << bits)


def _below_point(x: CFState, psi: PsiFunction, j: int, verdict, bits: int) -> mpq:
    """A time just below q_j; inside the violated stretch when index j is Violated.

    That stretch is [t*, q_j] with psi(t*) = <q_{j-1} x>, and can be much
    shorter than the default offset of 1/4.
    """
    default = x.q[j] - mpq(1, 4)
    if verdict is None or verdict.status is not Status.VIOLATED:
        return default
    _, outside = _right_endpoint(psi, verdict.lhs.lo, mpq(x.q[j - 1]), mpq(x.q[j]), bits)
    if outside is None or outside >= x.q[j] or outside <= default:
        return default
    mid = (outside + x.q[j]) / 2
    scale = mpz(1) << (2 * int(x.q[j]).bit_length() + 16)
    return mpq(ceil_rat(mid * scale), scale)


def cross_validate(x: CFState, psi: PsiFunction, window, s_grid=None, bits: int = 128,
                   retries: int = 3, raise_on_conflict: bool = True,
                   witness_cap: int = ENUMERATION_CAP // 2) -> CrossReport:
    """Compare the index criterion, the lattice criterion and witness coverage.

    Grid points sit at Dani times q_n - 1/4 and q_n + 1/4 for n in the
    window (plus one point past the last denominator of a rational).  At
    each point the lattice verdict, the convergent-based verdict for that
    time, and witness coverage must never certify opposite outcomes; in
    addition, a lattice violation just below q_n contradicts an index-n
    Satisfied verdict.
    """
    if not isinstance(x, CFState):
        x = cf_expand(rat(x))
    k = x.depth
    Y = x.value if x.is_exact else mpq(x.p[k], x.q[k])
    n_min, n_max = int(window[0]), int(window[1])
    n_top = min(n_max, k)
    floor_t = max(psi.t0, mpq(1))
    start = n_min
    while start <= n_top and x.q[start] - mpq(1, 4) <= floor_t:
        start += 1
    index_report = dirichlet_verdicts(x, psi, (start, n_max) if start <= n_max else (n_max, n_max),
                                      bits, retries) if start <= n_top else None
    targets: list[tuple[mpq, int, str]] = []
    if s_grid is None:
        seen = set()
        verdict_at = {v.n: v for v in index_report.verdicts} if index_report else {}
        for j in range(start, n_top + 1):
            below = _below_point(x, psi, j, verdict_at.get(j), bits)
            for side, t in (("below", below), ("above", x.q[j] + mpq(1, 4))):
                if t not in seen and t > floor_t:
                    seen.add(t)
                    targets.append((t, j, side))
        if x.is_exact:
            targets.append((2 * x.q[k] + mpq(1, 4), k, "above"))
        targets.sort()
        grid = [(_grid_point(psi, t, bits), j, side) for t, j, side in targets]
    else:
        grid = [(rat(s), -1, "free") for s in s_grid]
    points = []
    times = []
    for s, j, side in grid:
        dv = dynamical_verdict(Y, psi, s, bits, retries)
        t = dani_time(psi, 1, 1, s, dv.r, bits)
        times.append((s, j, side, dv, t))
    contradictions = []
    if times:
        T0 = max(floor_t, min(t.lo for *_, t in times))
        # enumeration is linear in the horizon; later points get no witness verdict
        T1 = min(max(t.hi for *_, t in times) + 1, mpq(witness_cap))
        wit = direct_witness_check(Y, psi, (T0, max(T0, T1)), bits)
    else:
        wit = WitnessReport((floor_t, floor_t), True, (), (), ())
    cf_index = {v.n: v.status for v in index_report.verdicts} if index_report else {}
    for s, j, side, dv, t in times:
        cf_st = _cf_time_status(x, psi, t, bits)
        w_st = witness_status(wit, t)
        pt = CrossPoint(s, t, j, side, dv.status, cf_st, w_st, dv.delta, dv.r)
        points.append(pt)
        sts = {dv.status, cf_st, w_st}
        if Status.SATISFIED in sts and Status.VIOLATED in sts:
            contradictions.append(
                f"s={fmt_rat(s)} (t near q_{j}, {side}): lattice={dv.status.value} "
                f"cf={cf_st.value} witness={w_st.value}"
            )
        if side == "below" and dv.status is Status.VIOLATED and cf_index.get(j) is Status.SATISFIED:
            contradictions.append(f"index {j}: Satisfied by convergents but lattice-violated just below q_{j}")
    report = CrossReport(Y, (n_min, n_max), index_report, tuple(points), wit, tuple(contradictions))
    if contradictions and raise_on_conflict:
        raise InconsistencyFound(f"{len(contradictions)} certified contradictions", list(contradictions))
    return report
