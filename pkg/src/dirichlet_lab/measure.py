"""Metric side: series test, product-threshold sets, Gauss map and measure,
truncated preimages, mixing probe and Monte-Carlo experiments."""
from __future__ import annotations

import heapq
import math
import random
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq, mpz

from .classify import Status, dirichlet_verdicts
from .errors import DirichletViolatesBound, EmptyPrefix, OrbitTerminated
from .interval import RatInterval, ceil_rat, floor_rat, ilog, ln2, rat
from .psi import LogGap, PowerGap, PsiFunction, ScaledDirichlet, fmt_rat
from .ratcf import CFState, cf_expand, cf_expand_certified, word_cylinder


# ---------------------------------------------------------------------------
# interval unions


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint, ordered open intervals with rational endpoints in [0, 1]."""

    parts: tuple[tuple[mpq, mpq], ...]

    def __post_init__(self):
        parts = sorted((rat(a), rat(b)) for a, b in self.parts)
        parts = [(a, b) for a, b in parts if a < b]
        for a, b in parts:
            if a < 0 or b > 1:
                raise ValueError(f"interval ({a}, {b}) leaves [0, 1]")
        for (_, b1), (a2, _) in zip(parts, parts[1:]):
            if a2 < b1:
                raise ValueError("intervals overlap")
        object.__setattr__(self, "parts", tuple(parts))

    @classmethod
    def of(cls, *pairs) -> "IntervalUnion":
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def contains(self, x) -> bool:
        x = rat(x)
        i = bisect_right([a for a, _ in self.parts], x) - 1
        return i >= 0 and self.parts[i][0] < x < self.parts[i][1]

    def complement(self) -> "IntervalUnion":
        """Open complement inside (0, 1) (endpoints of the parts are dropped)."""
        out, cur = [], mpq(0)
        for a, b in self.parts:
            if cur < a:
                out.append((cur, a))
            cur = b
        if cur < 1:
            out.append((cur, mpq(1)))
        return IntervalUnion(tuple(out))


def lebesgue(u: IntervalUnion) -> mpq:
    return sum((b - a for a, b in u.parts), mpq(0))


def gauss_interval(a, b, bits: int = 128) -> RatInterval:
    """Gauss measure of one interval: log((1+b)/(1+a)) / log 2."""
    return ilog((1 + rat(b)) / (1 + rat(a)), bits) / ln2(bits)


def gauss(u: IntervalUnion, bits: int = 128) -> RatInterval:
    """Enclosure of the Gauss measure, width about 2**-bits."""
    if not u.parts:
        return RatInterval.point(0)
    b = bits + 8 + max(1, len(u.parts)).bit_length()
    total = RatInterval.point(0)
    for lo, hi in u.parts:
        total = (total + ilog((1 + hi) / (1 + lo), b)).rounded(b + 16)
    return total / ln2(b)


# ---------------------------------------------------------------------------
# series test


@dataclass(frozen=True)
class SeriesReport:
    start: int
    N: int
    partial_sums: tuple[RatInterval, ...]
    analytic_class: str  # Convergent | Divergent | Unknown
    reason: str
    measure_of_set: str  # full | null | unknown


def analytic_class(psi: PsiFunction) -> tuple[str, str]:
    """Closed-form verdict for the built-in families; tables stay Unknown."""
    if isinstance(psi, ScaledDirichlet):
        if psi.c >= 1:
            return "Unknown", "t*psi(t) = c >= 1, outside the series test's hypothesis"
        return "Divergent", "terms are -(1-c) log(1-c) / n, a multiple of the harmonic series"
    if isinstance(psi, PowerGap):
        if psi.k == 0:
            return "Divergent", "k = 0 reduces to c/t with c = 1 - a: harmonic terms"
        return "Convergent", "terms are of order k log(n) n^(-1-k), summable for k > 0"
    if isinstance(psi, LogGap):
        if psi.k > 1:
            return "Convergent", "terms are of order log log n / (n (log n)^k), summable for k > 1"
        return "Divergent", "terms are of order log log n / (n (log n)^k), not summable for k <= 1"
    return "Unknown", "no closed-form rule for this family; partial sums alone decide nothing"


def series_term(psi: PsiFunction, n: int, bits: int = 128) -> RatInterval:
    """Enclosure of -log(1 - n psi(n)) (1 - n psi(n)) / n."""
    tp = psi.t_psi(n, bits)
    if tp.hi >= 1:
        tp = psi.t_psi(n, 2 * bits)
        if tp.hi >= 1:
            raise DirichletViolatesBound(f"t*psi(t) < 1 cannot be certified at t = {n}")
    g = RatInterval(1 - tp.hi, 1 - tp.lo)
    neglog = -ilog(g, bits + 8)
    lo = max(mpq(0), neglog.lo) * g.lo
    hi = neglog.hi * g.hi
    return RatInterval(lo, hi) / n


def main_series(psi: PsiFunction, N: int, bits: int = 128) -> SeriesReport:
    start = max(1, int(ceil_rat(psi.t0)))
    if N < start:
        raise ValueError(f"N = {N} precedes the domain start {start}")
    cls, reason = analytic_class(psi)
    if isinstance(psi, ScaledDirichlet) and psi.c >= 1:
        raise DirichletViolatesBound(f"t*psi(t) = {fmt_rat(psi.c)} is not below 1")
    b = bits + 8 + N.bit_length()
    total = RatInterval.point(0)
    sums = []
    for n in range(start, N + 1):
        total = (total + series_term(psi, n, b)).rounded(b)
        sums.append(total)
    meaning = {"Convergent": "full", "Divergent": "null"}.get(cls, "unknown")
    return SeriesReport(start, N, tuple(sums), cls, reason, meaning)


# ---------------------------------------------------------------------------
# the sets {x : a_1(x) a_2(x) > Psi}


def a_n_set(big_psi) -> IntervalUnion:
    """Exact interval decomposition of {x : a_1 a_2 > big_psi}."""
    v = rat(big_psi)
    if v < 1:
        raise ValueError("the threshold must be at least 1")
    top = int(floor_rat(v))
    parts = [(mpq(0), mpq(1, top + 1))]
    for a in range(1, top + 1):
        b = floor_rat(v / a) + 1
        parts.append((mpq(b, a * b + 1), mpq(1, a)))
    return IntervalUnion(tuple(parts))


def _split_sum(terms: Sequence[tuple[mpz, mpz]], lo: int, hi: int) -> tuple[mpz, mpz]:
    if hi - lo == 1:
        return terms[lo]
    mid = (lo + hi) // 2
    p1, q1 = _split_sum(terms, lo, mid)
    p2, q2 = _split_sum(terms, mid, hi)
    return p1 * q2 + p2 * q1, q1 * q2


def a_n_lebesgue(big_psi) -> mpq:
    """Exact Lebesgue measure of a_n_set(big_psi) without materializing the union.

    Each a <= floor(Psi) contributes 1/(a (a b + 1)); the tail adds
    1/(floor(Psi) + 1).  The sum uses binary splitting.
    """
    v = rat(big_psi)
    if v < 1:
        raise ValueError("the threshold must be at least 1")
    top = int(floor_rat(v))
    terms = [(mpz(1), mpz(top + 1))]
    if v.denominator == 1:
        vi = int(v)
        terms += [(mpz(1), mpz(a) * (a * (vi // a + 1) + 1)) for a in range(1, top + 1)]
    else:
        terms += [(mpz(1), mpz(a) * (a * (floor_rat(v / a) + 1) + 1)) for a in range(1, top + 1)]
    p, q = _split_sum(terms, 0, len(terms))
    return mpq(p, q)


@dataclass(frozen=True)
class AsymptoticRow:
    big_psi: mpq
    lebesgue: mpq
    ratio: RatInterval  # lebesgue * Psi / log Psi
    upper_bound: RatInterval
    lower_bound: RatInterval


def asymptotic_check(values: Iterable, bits: int = 128) -> list[AsymptoticRow]:
    """Exact measure of each set against log(Psi)/Psi, with explicit two-sided bounds.

    upper: 1/(Psi+1) + log(Psi)/(Psi+1) + 1/Psi
    lower: log(Psi)/(Psi+1) + log((Psi+2)/(2 Psi+1))/(Psi+1)
    """
    rows = []
    for raw in values:
        v = rat(raw)
        if v < 2:
            raise ValueError("asymptotic_check needs Psi >= 2")
        lam = a_n_lebesgue(v)
        L = ilog(v, bits)
        ratio = (L.reciprocal() * (lam * v)).rounded(bits)
        upper = (1 / (v + 1) + L / (v + 1) + 1 / v).rounded(bits)
        lower = (L / (v + 1) + ilog((v + 2) / (2 * v + 1), bits) / (v + 1)).rounded(bits)
        rows.append(AsymptoticRow(v, lam, ratio, upper, lower))
    return rows


# ---------------------------------------------------------------------------
# Gauss map


def gauss_map(x) -> mpq:
    x = rat(x)
    if x == 0:
        raise OrbitTerminated("the Gauss map is undefined at 0")
    y = 1 / x
    return y - floor_rat(y)


def gauss_map_orbit(x, steps: int) -> list:
    """Orbit x, Tx, ..., T^steps x.

    Rationals are iterated exactly and cross-checked against the entry
    shift; a prefix (CFState without value) is shifted entry by entry.
    """
    if isinstance(x, CFState) and x.value is None:
        if steps > x.depth:
            raise OrbitTerminated(f"prefix of depth {x.depth} supports at most {x.depth} shifts")
        out = [x]
        for _ in range(steps):
            out.append(out[-1].shift())
        return out
    x = x.value if isinstance(x, CFState) else rat(x)
    orbit = [x]
    cf = cf_expand(x)
    for i in range(steps):
        if orbit[-1] == 0:
            raise OrbitTerminated(f"orbit reached 0 after {i} steps")
        nxt = gauss_map(orbit[-1])
        cf = cf.shift()
        if cf.value != nxt:  # pragma: no cover - guards the shift identity
            raise ArithmeticError("Gauss map and entry shift disagree")
        orbit.append(nxt)
    return orbit


def cylinder_set(word: Sequence[int]) -> IntervalUnion:
    c = word_cylinder([mpz(a) for a in word])
    return IntervalUnion(((c.lo, c.hi),))


# ---------------------------------------------------------------------------
# truncated preimages


@dataclass(frozen=True)
class PreimageResult:
    union: IntervalUnion
    defect: mpq  # bound on the Lebesgue measure of everything dropped
    discarded_gauss: RatInterval  # exact-up-to-enclosure Gauss measure dropped
    steps: int
    truncation_count: int


def _branch(a: int, lo: mpq, hi: mpq) -> tuple[mpq, mpq]:
    return 1 / (a + hi), 1 / (a + lo)


def _preimage_step(parts, K: int, bits: int):
    # branch widths decrease in a, so a heap yields the K widest globally
    heap = []
    for i, (lo, hi) in enumerate(parts):
        w = (hi - lo) / ((1 + lo) * (1 + hi))
        heapq.heappush(heap, (-w, i, 1))
    kept_count = [0] * len(parts)
    kept = []
    while heap and len(kept) < K:
        _, i, a = heapq.heappop(heap)
        lo, hi = parts[i]
        kept.append(_branch(a, lo, hi))
        kept_count[i] = a
        na = a + 1
        heapq.heappush(heap, (-(hi - lo) / ((na + lo) * (na + hi)), i, na))
    lost_leb = mpq(0)
    lost_gauss = RatInterval.point(0)
    for (lo, hi), A in zip(parts, kept_count):
        d = hi - lo
        bound = mpq(1) / (A + 1 + lo)
        if A + lo > 0:
            bound = min(bound, d / (A + lo))
        lost_leb += bound
        # the branches a > A telescope to this exact Gauss measure
        lost_gauss = (lost_gauss + ilog((A + 1 + hi) / (A + 1 + lo), bits)).rounded(bits + 16)
    return kept, lost_leb, lost_gauss


def preimage(u: IntervalUnion, iterations: int = 1, truncation_count: int = 64,
             bits: int = 128) -> PreimageResult:
    """Iterated inverse image keeping the ``truncation_count`` widest branches per step."""
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    if truncation_count < 1:
        raise ValueError("truncation_count must be positive")
    b = bits + 16
    parts = list(u.parts)
    doubling = mpq(0)
    lost = RatInterval.point(0)
    for step in range(iterations):
        parts, leb, g = _preimage_step(parts, truncation_count, b)
        # a set dropped earlier is pulled back later: Lebesgue grows by at most 2x
        doubling = 2 * doubling + leb if step else leb
        lost = lost + g
        parts.sort()
    lost = lost / ln2(b)
    # Gauss measure is T-invariant and lambda <= log 2 * mu
    via_gauss = (lost * ln2(b)).hi
    return PreimageResult(IntervalUnion(tuple(parts)), min(doubling, via_gauss), lost,
                          iterations, truncation_count)


# ---------------------------------------------------------------------------
# mixing


@dataclass(frozen=True)
class MixingReport:
    word: tuple[int, ...]
    gap: int
    mu_cylinder: RatInterval
    mu_target: RatInterval
    mu_intersection: RatInterval
    ratio: RatInterval  # |mu(E cap T^-(n+k) F) - mu(E) mu(F)| / (mu(E) mu(F))
    defect: RatInterval


def _mobius(word: Sequence[int]):
    cf = CFState.from_entries(word)
    k = cf.depth
    p, pp, q, qp = cf.p[k], cf.p[k - 1], cf.q[k], cf.q[k - 1]

    def h(y: mpq) -> mpq:
        return (p + pp * y) / (q + qp * y)

    return h, q


def mixing_probe(word: Sequence[int], F: IntervalUnion, gap: int,
                 truncation_count: int = 64, bits: int = 128) -> MixingReport:
    """Empirical mixing ratio for a cylinder and a target union.

    E_r intersected with T^-(n+k) F is the image of T^-n F under the inverse
    branch of the cylinder, so only the n-fold preimage is truncated.
    """
    word = tuple(int(a) for a in word)
    if not word:
        raise ValueError("the cylinder word must be non-empty")
    h, qk = _mobius(word)
    if gap > 0:
        pre = preimage(F, gap, truncation_count, bits)
        parts, leb_defect = pre.union.parts, pre.defect
    else:
        parts, leb_defect = F.parts, mpq(0)
    mapped = [tuple(sorted((h(a), h(b)))) for a, b in parts]
    inner = gauss(IntervalUnion(tuple(mapped)), bits)
    # |h'| <= 1/q_k^2 and the Gauss density is at most 1/log 2
    dmu = RatInterval(0, ((leb_defect / (qk * qk)) * ln2(bits).reciprocal()).hi)
    mu_i = RatInterval(inner.lo, inner.hi + dmu.hi)
    cyl = word_cylinder([mpz(a) for a in word])
    mu_e = gauss_interval(cyl.lo, cyl.hi, bits)
    mu_f = gauss(F, bits)
    prod = mu_e * mu_f
    diff = abs(mu_i - prod)
    ratio = diff / prod if prod.lo > 0 else RatInterval(0, 0)
    return MixingReport(word, gap, mu_e, mu_f, mu_i, ratio.rounded(bits), dmu)


# ---------------------------------------------------------------------------
# Monte-Carlo zero-one experiment


def sample_interval(seed, index: int, sample_bits: int) -> RatInterval:
    """The index-th dyadic sample [m/2^B, (m+1)/2^B] of a seeded stream."""
    rng = random.Random(f"{seed}:{index}")
    m = rng.randrange(1, (1 << sample_bits) - 1)
    scale = mpz(1) << sample_bits
    return RatInterval(mpq(m, scale), mpq(m + 1, scale))


@dataclass(frozen=True)
class SampleOutcome:
    index: int
    certified_depth: int
    violated: int
    indeterminate: int
    satisfied: int


@dataclass(frozen=True)
class MonteCarloReport:
    samples: int
    window: tuple[int, int]
    seed: object
    sample_bits: int
    fraction_no_violation: mpq
    violated_samples: int
    indeterminate_samples: int
    indeterminate_verdicts: int
    outcomes: tuple[SampleOutcome, ...] = field(repr=False)


def _run_sample(args) -> SampleOutcome:
    psi, i, window, seed, bits, sample_bits, retries = args
    n0, n1 = window
    iv = sample_interval(seed, i, sample_bits)
    try:
        cf = cf_expand_certified(iv)
    except EmptyPrefix:
        return SampleOutcome(i, 0, 0, n1 - n0 + 1, 0)
    top = min(n1, cf.depth)
    unknown = n1 - top
    if top < n0:
        return SampleOutcome(i, cf.depth, 0, n1 - n0 + 1, 0)
    rep = dirichlet_verdicts(cf, psi, (n0, top), bits, retries)
    return SampleOutcome(i, cf.depth, rep.count(Status.VIOLATED),
                         rep.count(Status.INDETERMINATE) + unknown, rep.count(Status.SATISFIED))


def monte_carlo_zero_one(psi: PsiFunction, samples: int, window, seed=0, bits: int = 128,
                         sample_bits: int = 256, retries: int = 3,
                         threads: int = 1) -> MonteCarloReport:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    window = (int(window[0]), int(window[1]))
    jobs = [(psi, i, window, seed, bits, sample_bits, retries) for i in range(samples)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_sample, jobs, chunksize=max(1, samples // (4 * threads))))
    else:
        outcomes = [_run_sample(j) for j in jobs]
    clean = sum(o.violated == 0 for o in outcomes)
    return MonteCarloReport(
        samples, window, seed, sample_bits, mpq(clean, samples),
        sum(o.violated > 0 for o in outcomes),
        sum(o.indeterminate > 0 for o in outcomes),
        sum(o.indeterminate for o in outcomes),
        tuple(outcomes),
    )


# ---------------------------------------------------------------------------
# growth of denominators


@dataclass(frozen=True)
class LevyReport:
    samples: int
    depth: int
    seed: object
    lower_bound_holds: bool  # q_n^2 >= 2^n for every n >= 2 and every sample
    per_sample: tuple[float, ...]  # log q_depth / depth
    minimum: float
    mean: float
    maximum: float
    empirical_B: float  # max over samples and n >= depth/2 of q_n^(1/n)


def growth_lower_bound_holds(cf: CFState) -> bool:
    return all(cf.q[n] * cf.q[n] >= mpz(1) << n for n in range(2, cf.depth + 1))


def _log_ratio(q: mpz, n: int) -> float:
    # float only: observational statistic
    return (math.log(int(q >> max(0, q.bit_length() - 60))) +
            max(0, q.bit_length() - 60) * math.log(2)) / n


def prefix_for_sample(seed, index: int, depth: int) -> CFState:
    """A prefix of at least ``depth`` entries of a seeded uniform real."""
    rng = random.Random(f"{seed}:{index}")
    bits = 4 * depth + 64
    m = rng.getrandbits(bits) | 1
    while True:
        scale = mpz(1) << bits
        iv = RatInterval(mpq(m, scale), mpq(m + 1, scale))
        try:
            cf = cf_expand_certified(iv)
        except EmptyPrefix:
            cf = None
        if cf is not None and cf.depth >= depth:
            return CFState.from_entries(cf.entries[:depth])
        extra = bits
        m = (m << extra) | rng.getrandbits(extra)
        bits += extra


def levy_growth_probe(samples: int, depth: int, seed=0) -> LevyReport:
    if depth < 10:
        raise ValueError("depth must be at least 10")
    per, ok, B = [], True, 0.0
    for i in range(samples):
        cf = prefix_for_sample(seed, i, depth)
        ok = ok and growth_lower_bound_holds(cf)
        per.append(_log_ratio(cf.q[depth], depth))
        for n in range(max(2, depth // 2), depth + 1):
            B = max(B, math.exp(_log_ratio(cf.q[n], n)))
    return LevyReport(samples, depth, seed, ok, tuple(per), min(per), sum(per) / len(per),
                      max(per), B)
