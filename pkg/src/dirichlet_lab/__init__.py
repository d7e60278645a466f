"""Exact-arithmetic laboratory for Dirichlet-improvable and non-improvable reals."""
from importlib.metadata import PackageNotFoundError, version

from .classify import (
    ClassificationReport,
    IndexVerdict,
    ProductOutcome,
    ProductVerdict,
    Status,
    Summary,
    approximable_verdicts,
    dirichlet_verdicts,
    product_criterion,
    product_verdicts,
    summarize,
)
from .construct import build_counterexample
from .errors import (
    BelowS0,
    ConstructionOverflow,
    DirichletViolatesBound,
    EmptyPrefix,
    InconsistencyFound,
    LabError,
    OrbitTerminated,
    OutOfDomain,
    PrecisionExhausted,
    PsiTooLarge,
    WindowTooDeep,
)
from .interval import RatInterval
from .lattice import (
    cross_validate,
    dani_r,
    delta,
    direct_witness_check,
    dynamical_verdicts,
    flowed_basis,
)
from .measure import (
    IntervalUnion,
    a_n_set,
    asymptotic_check,
    gauss,
    gauss_map_orbit,
    levy_growth_probe,
    main_series,
    mixing_probe,
    monte_carlo_zero_one,
    preimage,
)
from .psi import LogGap, PowerGap, PsiFunction, ScaledDirichlet, StepTable, parse_psi
from .ratcf import CFState, cf_expand, cf_expand_certified, tail_bounds

try:
    __version__ = version("dirichlet-lab")
except PackageNotFoundError:  # pragma: no cover - running from a bare checkout
    __version__ = "0.0.0"

__all__ = [
    "a_n_set",
    "approximable_verdicts",
    "asymptotic_check",
    "BelowS0",
    "build_counterexample",
    "cf_expand",
    "cf_expand_certified",
    "CFState",
    "ClassificationReport",
    "ConstructionOverflow",
    "cross_validate",
    "dani_r",
    "delta",
    "direct_witness_check",
    "dirichlet_verdicts",
    "DirichletViolatesBound",
    "dynamical_verdicts",
    "EmptyPrefix",
    "flowed_basis",
    "gauss",
    "gauss_map_orbit",
    "InconsistencyFound",
    "IndexVerdict",
    "IntervalUnion",
    "LabError",
    "levy_growth_probe",
    "LogGap",
    "main_series",
    "mixing_probe",
    "monte_carlo_zero_one",
    "OrbitTerminated",
    "OutOfDomain",
    "parse_psi",
    "PowerGap",
    "PrecisionExhausted",
    "preimage",
    "product_criterion",
    "product_verdicts",
    "ProductOutcome",
    "ProductVerdict",
    "PsiFunction",
    "PsiTooLarge",
    "RatInterval",
    "ScaledDirichlet",
    "Status",
    "StepTable",
    "summarize",
    "Summary",
    "tail_bounds",
    "WindowTooDeep",
]
