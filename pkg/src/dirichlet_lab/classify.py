"""Certified per-index classification against an approximating function.

Index n compares |q_{n-1} x - p_{n-1}| (over the whole cylinder) with
psi(q_n).  Comparisons are strict on the side of the inequality that
defines the property, and anything the enclosures cannot separate is
reported as Indeterminate rather than guessed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


from .errors import DirichletViolatesBound, OutOfDomain, WindowTooDeep
from .interval import RatInterval
from .psi import PsiFunction, fmt_rat
from .ratcf import CFState, best_approx_distance, convergent_distance


class Status(str, enum.Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    INDETERMINATE = "Indeterminate"


class ProductOutcome(str, enum.Enum):
    IMPLIES_DIRICHLET = "ImpliesDirichletHere"
    IMPLIES_VIOLATION = "ImpliesViolationHere"
    GAP = "Gap"


@dataclass(frozen=True)
class IndexVerdict:
    n: int
    status: Status
    lhs: RatInterval
    rhs: RatInterval


@dataclass(frozen=True)
class Summary:
    kind: str  # AllSatisfiedFrom | ViolationsAt | Inconclusive
    start: int | None = None
    violations: tuple[int, ...] = ()


@dataclass(frozen=True)
class ClassificationReport:
    window: tuple[int, int]
    verdicts: tuple[IndexVerdict, ...]
    summary: Summary
    terminal_index: int | None = None
    notes: tuple[str, ...] = field(default=())

    def statuses(self) -> list[Status]:
        return [v.status for v in self.verdicts]

    def count(self, status: Status) -> int:
        return sum(v.status is status for v in self.verdicts)


@dataclass(frozen=True)
class ProductVerdict:
    n: int
    outcome: ProductOutcome
    product: int
    threshold: RatInterval  # enclosure of t psi / (1 - t psi) at t = q_n


def compare(lhs: RatInterval, rhs: RatInterval) -> Status:
    """Three-valued ``lhs < rhs``."""
    if lhs.hi < rhs.lo:
        return Status.SATISFIED
    if lhs.lo >= rhs.hi:
        return Status.VIOLATED
    return Status.INDETERMINATE


def summarize(verdicts, terminal_index: int | None = None) -> Summary:
    """Pure function of the verdict sequence (plus the terminal index of a rational)."""
    statuses = [v.status for v in verdicts]
    idx = [v.n for v in verdicts]
    if terminal_index is not None:
        # a terminating expansion hits <q x> = 0 at its last denominator
        start = terminal_index + 1
        for n, s in zip(reversed(idx), reversed(statuses)):
            if s is not Status.SATISFIED:
                break
            start = min(start, n)
        return Summary("AllSatisfiedFrom", start=start)
    bad = tuple(n for n, s in zip(idx, statuses) if s is Status.VIOLATED)
    if bad:
        return Summary("ViolationsAt", violations=bad)
    if not statuses or statuses[-1] is not Status.SATISFIED:
        return Summary("Inconclusive")
    start = idx[-1]
    for n, s in zip(reversed(idx), reversed(statuses)):
        if s is not Status.SATISFIED:
            break
        start = n
    return Summary("AllSatisfiedFrom", start=start)


def _check_window(cf: CFState, window) -> tuple[int, int]:
    n_min, n_max = int(window[0]), int(window[1])
    if n_min < 1 or n_max < n_min:
        raise ValueError(f"bad window [{n_min}, {n_max}]")
    if n_max > cf.depth and not cf.is_exact:
        raise WindowTooDeep(f"window ends at {n_max} but only {cf.depth} entries are known")
    return n_min, n_max


def _rhs(psi: PsiFunction, t, bits: int) -> RatInterval:
    try:
        return psi.eval(t, bits)
    except OutOfDomain as exc:
        raise OutOfDomain(f"{exc}; start the window at a later index") from None


_TAIL_LADDER = (4, 16, None)


def _escalating(lhs_at, psi: PsiFunction, t, bits: int, retries: int):
    """Three-valued lhs < psi(t).

    On overlap the lhs is first recomputed from more tail entries, then the
    psi precision is doubled (up to ``retries`` times).
    """
    b = bits
    rhs = _rhs(psi, t, b)
    for tail in _TAIL_LADDER:
        lhs = lhs_at(tail)
        status = compare(lhs, rhs)
        if status is not Status.INDETERMINATE:
            return status, lhs, rhs
    for _ in range(retries):
        if rhs.is_point:
            break
        b *= 2
        rhs = _rhs(psi, t, b)
        status = compare(lhs, rhs)
        if status is not Status.INDETERMINATE:
            break
    return status, lhs, rhs


def dirichlet_verdicts(cf: CFState, psi: PsiFunction, window, bits: int = 128,
                       retries: int = 3) -> ClassificationReport:
    n_min, n_max = _check_window(cf, window)
    k = cf.depth
    out = []
    for n in range(n_min, n_max + 1):
        if n > k:
            lhs = RatInterval.point(0)
            rhs = _rhs(psi, cf.q[k], bits)
            out.append(IndexVerdict(n, Status.SATISFIED, lhs, rhs))
            continue
        status, lhs, rhs = _escalating(lambda tail: best_approx_distance(cf, n, tail),
                                       psi, cf.q[n], bits, retries)
        out.append(IndexVerdict(n, status, lhs, rhs))
    terminal = k if cf.is_exact else None
    notes = []
    if terminal is not None:
        notes.append("rational input: the terminal denominator gives an exact solution for every later t")
    else:
        notes.append("finite window only: no asymptotic membership is claimed")
    return ClassificationReport((n_min, n_max), tuple(out), summarize(out, terminal),
                                terminal, tuple(notes))


def approximable_verdicts(cf: CFState, psi: PsiFunction, window, bits: int = 128,
                          retries: int = 3) -> ClassificationReport:
    """Per convergent, is |q_n x - p_n| < psi(q_n)?"""
    n_min, n_max = _check_window(cf, window)
    k = cf.depth
    out = []
    for n in range(n_min, n_max + 1):
        if n >= k and cf.is_exact:
            lhs = RatInterval.point(0)
            rhs = _rhs(psi, cf.q[k], bits)
            out.append(IndexVerdict(n, Status.SATISFIED, lhs, rhs))
            continue
        status, lhs, rhs = _escalating(lambda tail: convergent_distance(cf, n, tail),
                                       psi, cf.q[n], bits, retries)
        out.append(IndexVerdict(n, status, lhs, rhs))
    terminal = k if cf.is_exact else None
    return ClassificationReport((n_min, n_max), tuple(out), summarize(out, terminal), terminal,
                                ("infinitely-many semantics: Satisfied entries are solutions",))


def product_threshold(psi: PsiFunction, t, bits: int = 128, retries: int = 3) -> RatInterval:
    """Enclosure of (1/(t psi(t)) - 1)**-1 = t psi / (1 - t psi)."""
    b = bits
    for _ in range(retries + 1):
        tp = psi.t_psi(t, b)
        if tp.hi < 1:
            return RatInterval(tp.lo / (1 - tp.lo), tp.hi / (1 - tp.hi))
        if tp.lo >= 1:
            break
        b *= 2
    raise DirichletViolatesBound(f"t*psi(t) < 1 cannot be certified at t = {fmt_rat(t)}")


def product_criterion(cf: CFState, psi: PsiFunction, n: int, bits: int = 128,
                      retries: int = 3) -> ProductVerdict:
    """Compare a_{n+1} a_n with both product thresholds at t = q_n.

    Gap covers both the factor-4 zone between the thresholds and any
    enclosure overlap left after the retries.
    """
    if not 1 <= n < cf.depth:
        raise WindowTooDeep(f"product criterion at n = {n} needs {n + 1} known entries")
    prod = int(cf.a(n) * cf.a(n + 1))
    b = bits
    for _ in range(retries + 1):
        u = product_threshold(psi, cf.q[n], b, retries)
        if prod > u.hi:
            return ProductVerdict(n, ProductOutcome.IMPLIES_VIOLATION, prod, u)
        if 4 * prod <= u.lo:
            return ProductVerdict(n, ProductOutcome.IMPLIES_DIRICHLET, prod, u)
        certain_gap = prod <= u.lo and 4 * prod > u.hi
        if certain_gap or u.is_point:
            break
        b *= 2
    return ProductVerdict(n, ProductOutcome.GAP, prod, u)


def product_verdicts(cf: CFState, psi: PsiFunction, window, bits: int = 128,
                     retries: int = 3) -> list[ProductVerdict]:
    lo, hi = int(window[0]), int(window[1])
    return [product_criterion(cf, psi, n, bits, retries) for n in range(lo, hi + 1)]
