"""Greedy construction of a certified non-Dirichlet real.

Each new entry is the least positive integer with
a_{n+1} * a_n > U_n, where U_n is a certified upper bound of
t psi(t) / (1 - t psi(t)) at t = q_n.
"""
from __future__ import annotations

from gmpy2 import mpz

from .classify import product_threshold
from .errors import ConstructionOverflow, DirichletViolatesBound, PsiTooLarge
from .interval import ceil_rat, floor_rat
from .psi import PsiFunction
from .ratcf import CFState

DEFAULT_ENTRY_BIT_CAP = 1 << 21


def seed_entry(psi: PsiFunction) -> mpz:
    """a_1 = 1 unless the domain of psi starts beyond 1, then the least q_1 inside it."""
    if psi.t0 <= 1:
        return mpz(1)
    return ceil_rat(psi.t0)


def build_counterexample(psi: PsiFunction, depth: int, bits: int = 128, retries: int = 3,
                         entry_bit_cap: int = DEFAULT_ENTRY_BIT_CAP) -> CFState:
    if depth < 2:
        raise ValueError("depth must be at least 2")
    entries = [seed_entry(psi)]
    q_prev, q = mpz(1), entries[0]
    for _ in range(depth - 1):
        try:
            u = product_threshold(psi, q, bits, retries)
        except DirichletViolatesBound:
            raise PsiTooLarge(q) from None
        a = floor_rat(u.hi / entries[-1]) + 1
        if a.bit_length() > entry_bit_cap:
            raise ConstructionOverflow(
                f"entry {len(entries) + 1} needs {a.bit_length()} bits (cap {entry_bit_cap})"
            )
        entries.append(a)
        q_prev, q = q, a * q + q_prev
    return CFState.from_entries(entries)
