"""Approximating functions with certified enclosures.

Every family is described through ``t * psi(t)``, which is what the
criteria actually consume; ``psi(t)`` is that enclosure divided by ``t``.
Evaluation at ``bits`` intersects a ladder of precisions (64, 128, ...),
so asking for more bits never returns a wider interval.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import DirichletViolatesBound, OutOfDomain
from .interval import RatInterval, ceil_rat, ilog, ipow, rat

_BASE_LEVEL = 64


def _ladder(bits: int) -> list[int]:
    levels = [_BASE_LEVEL]
    while levels[-1] < bits + 8:
        levels.append(levels[-1] * 2)
    return levels


def _intersect(a: RatInterval, b: RatInterval) -> RatInterval:
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:  # pragma: no cover - would mean an unsound kernel
        raise ArithmeticError(f"disjoint enclosures {a} and {b}")
    return RatInterval(lo, hi)


def fmt_rat(x) -> str:
    x = rat(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MonotonicityReport:
    non_increasing_violations: list = field(default_factory=list)
    t_psi_violations: list = field(default_factory=list)

    @property
    def non_increasing(self) -> bool:
        return not self.non_increasing_violations

    @property
    def t_psi_nondecreasing(self) -> bool:
        return not self.t_psi_violations


class PsiFunction:
    """Base class.  Subclasses implement ``_t_psi_at(t, bits)``."""

    family: str = "abstract"
    t0: mpq

    # hooks ------------------------------------------------------------
    def _t_psi_at(self, t: mpq, bits: int) -> RatInterval:
        raise NotImplementedError

    def params(self) -> dict[str, mpq]:
        raise NotImplementedError

    def approx(self, t):
        """Floating-point value for prefilters only (works on numpy arrays)."""
        raise NotImplementedError

    # certified evaluation --------------------------------------------
    def _check_domain(self, t: mpq) -> None:
        if t < self.t0:
            raise OutOfDomain(f"t = {fmt_rat(t)} lies below the domain start t0 = {fmt_rat(self.t0)}")

    def t_psi(self, t, bits: int = 128) -> RatInterval:
        """Enclosure of t * psi(t)."""
        t = rat(t)
        self._check_domain(t)
        out = None
        for level in _ladder(bits):
            e = self._t_psi_at(t, level)
            out = e if out is None else _intersect(out, e)
            if out.is_point:
                break
        return out

    def eval(self, t, bits: int = 128) -> RatInterval:
        """Enclosure of psi(t) of width at most 2**-bits."""
        t = rat(t)
        return self.t_psi(t, bits) / t

    def eval_interval(self, t: RatInterval, bits: int = 128) -> RatInterval:
        """Enclosure of psi over every t in the interval (uses monotonicity)."""
        if t.is_point:
            return self.eval(t.lo, bits)
        return RatInterval(self.eval(t.hi, bits).lo, self.eval(t.lo, bits).hi)

    def eval_bigpsi(self, t, bits: int = 128, retries: int = 3) -> RatInterval:
        """Enclosure of 1 / (1 - t psi(t))."""
        t = rat(t)
        b = bits
        for _ in range(retries + 1):
            tp = self.t_psi(t, b)
            if tp.hi < 1:
                return RatInterval(1 / (1 - tp.lo), 1 / (1 - tp.hi))
            if tp.lo >= 1:
                break
            b *= 2
        raise DirichletViolatesBound(
            f"t*psi(t) < 1 cannot be certified at t = {fmt_rat(t)} for {self.spec_string()}"
        )

    def check_monotonicity(self, grid: Iterable, bits: int = 128) -> MonotonicityReport:
        """Certain violations of either standing assumption between consecutive grid points."""
        pts = [rat(t) for t in grid]
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("grid must be strictly increasing")
        vals = [self.eval(t, bits) for t in pts]
        tps = [self.t_psi(t, bits) for t in pts]
        ni = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1) if vals[i + 1].lo > vals[i].hi]
        tv = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1) if tps[i + 1].hi < tps[i].lo]
        return MonotonicityReport(ni, tv)

    # text form ---------------------------------------------------------
    def spec_string(self) -> str:
        parts = [self.family] + [f"{k}={fmt_rat(v)}" for k, v in self.params().items()]
        parts.append(f"t0={fmt_rat(self.t0)}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"<{self.spec_string()}>"

    def __eq__(self, other) -> bool:
        return isinstance(other, PsiFunction) and self.spec_string() == other.spec_string()

    def __hash__(self) -> int:
        return hash(self.spec_string())


class ScaledDirichlet(PsiFunction):
    """psi(t) = c / t."""

    family = "scaled_dirichlet"

    def __init__(self, c, t0=None):
        self.c = rat(c)
        if self.c <= 0:
            raise ValueError("c must be positive")
        self.t0 = rat(t0) if t0 is not None else mpq(1)
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")

    def _t_psi_at(self, t, bits):
        return RatInterval.point(self.c)

    def params(self):
        return {"c": self.c}

    def approx(self, t):
        return float(self.c) / t


class PowerGap(PsiFunction):
    """psi(t) = (1 - a t**-k) / t."""

    family = "power_gap"

    def __init__(self, a, k, t0=None):
        self.a, self.k = rat(a), rat(k)
        if self.a <= 0 or self.k < 0:
            raise ValueError("power_gap needs a > 0 and k >= 0")
        if self.k == 0 and self.a >= 1:
            raise ValueError("power_gap with k = 0 needs a < 1")
        self.t0 = rat(t0) if t0 is not None else self._default_t0()
        if self.t0 <= 0 or self._t_psi_at(self.t0, 64).hi <= 0:
            raise ValueError("psi must be positive from t0 on")

    def _default_t0(self) -> mpq:
        # psi' <= 0 exactly when t**k >= a (k + 1)
        if self.k == 0:
            return mpq(1)
        bound = self.a * (self.k + 1)

        def ok(t: int) -> bool:
            return ipow(mpq(t), self.k, 64).lo >= bound

        guess = float(bound) ** (1 / float(self.k))
        t = max(1, int(ceil_rat(rat(guess))) - 2)
        while not ok(t):
            t += 1
        while t > 1 and ok(t - 1):
            t -= 1
        return mpq(t)

    def _t_psi_at(self, t, bits):
        return 1 - self.a * ipow(t, -self.k, bits)

    def params(self):
        return {"a": self.a, "k": self.k}

    def approx(self, t):
        return (1 - float(self.a) * t ** (-float(self.k))) / t


class LogGap(PsiFunction):
    """psi(t) = (1 - a (log t)**-k) / t."""

    family = "log_gap"

    def __init__(self, a, k, t0=None):
        self.a, self.k = rat(a), rat(k)
        if self.a <= 0 or self.k <= 0:
            raise ValueError("log_gap needs a > 0 and k > 0")
        self.t0 = rat(t0) if t0 is not None else self._default_t0()
        if self.t0 <= 1 or self._t_psi_at(self.t0, 64).hi <= 0:
            raise ValueError("psi must be positive from t0 on")

    def _monotone_from(self, t: int) -> bool:
        # psi' <= 0 exactly when a L**-k (1 + k/L) <= 1, L = log t
        L = ilog(mpq(t), 64)
        g = self.a * ipow(L, -self.k, 64) * (1 + self.k / L)
        return g.hi < 1

    def _default_t0(self) -> mpq:
        t = 2
        while not self._monotone_from(t):
            t = t * 2 if t < 2**20 else t + 2**20
            if t > 2**200:
                raise ValueError("log_gap parameters leave no practical monotone domain")
        lo, hi = max(2, t // 2), t
        while lo < hi:
            mid = (lo + hi) // 2
            if self._monotone_from(mid):
                hi = mid
            else:
                lo = mid + 1
        return mpq(hi)

    def _t_psi_at(self, t, bits):
        L = ilog(t, bits + 8)
        return 1 - self.a * ipow(L, -self.k, bits + 8)

    def params(self):
        return {"a": self.a, "k": self.k}

    def approx(self, t):
        import numpy as np

        return (1 - float(self.a) * np.log(t) ** (-float(self.k))) / t


class StepTable(PsiFunction):
    """Right-continuous step function through sorted (t_i, v_i) breakpoints."""

    family = "table"

    def __init__(self, points: Sequence, validate: bool = True, t0=None):
        pts = [(rat(t), rat(v)) for t, v in points]
        if not pts:
            raise ValueError("table needs at least one breakpoint")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("table breakpoints must be strictly increasing in t")
        if any(v <= 0 for _, v in pts) or pts[0][0] <= 0:
            raise ValueError("table values and breakpoints must be positive")
        if validate and any(b[1] > a[1] for a, b in zip(pts, pts[1:])):
            raise ValueError("table values must be non-increasing")
        self.points = tuple(pts)
        self.t0 = rat(t0) if t0 is not None else pts[0][0]
        if self.t0 < pts[0][0]:
            raise ValueError("t0 precedes the first breakpoint")

    def value_at(self, t: mpq) -> mpq:
        v = self.points[0][1]
        for ti, vi in self.points:
            if ti <= t:
                v = vi
            else:
                break
        return v

    def _t_psi_at(self, t, bits):
        return RatInterval.point(t * self.value_at(t))

    def eval(self, t, bits=128):
        t = rat(t)
        self._check_domain(t)
        return RatInterval.point(self.value_at(t))

    def params(self):
        return {}

    def spec_string(self):
        pts = ",".join(f"{fmt_rat(t)}:{fmt_rat(v)}" for t, v in self.points)
        return f"table points={pts} t0={fmt_rat(self.t0)}"

    def approx(self, t):
        import numpy as np

        ts = np.array([float(p[0]) for p in self.points])
        vs = np.array([float(p[1]) for p in self.points])
        idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 1)
        return vs[idx]


_FAMILIES = {"scaled_dirichlet", "power_gap", "log_gap", "table"}
_KV = re.compile(r"^([a-z0-9_]+)=(\S+)$")


def parse_psi(text: str) -> PsiFunction:
    """Parse e.g. ``"power_gap a=1 k=1/2"`` or ``"table points=1:1/2,10:1/20"``."""
    tokens = text.split()
    if not tokens or tokens[0] not in _FAMILIES:
        raise ValueError(f"unknown psi family in {text!r}; expected one of {sorted(_FAMILIES)}")
    family, kv = tokens[0], {}
    for tok in tokens[1:]:
        m = _KV.match(tok)
        if not m:
            raise ValueError(f"malformed parameter {tok!r}")
        kv[m.group(1)] = m.group(2)
    t0 = kv.pop("t0", None)
    try:
        if family == "scaled_dirichlet":
            psi = ScaledDirichlet(kv.pop("c", "1"), t0=t0)
        elif family == "power_gap":
            psi = PowerGap(kv.pop("a"), kv.pop("k"), t0=t0)
        elif family == "log_gap":
            psi = LogGap(kv.pop("a"), kv.pop("k"), t0=t0)
        else:
            raw = kv.pop("points")
            pts = [p.split(":") for p in raw.split(",")]
            if any(len(p) != 2 for p in pts):
                raise ValueError("table points must look like t:v,t:v")
            psi = StepTable(pts, t0=t0)
    except KeyError as exc:
        raise ValueError(f"missing parameter {exc.args[0]!r} for {family}") from None
    if kv:
        raise ValueError(f"unexpected parameters {sorted(kv)} for {family}")
    return psi
