"""Command-line front end.

Every subcommand writes one JSON document (or CSV where the output is a
flat table) to stdout.  Exact rationals are printed as "p/q" strings and
enclosures as [lo, hi] pairs of such strings, so every certified number
can be parsed back without loss.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import os
import sys

from gmpy2 import mpfr, mpq, mpz

from . import __version__
from .classify import (
    ProductOutcome,
    Status,
    approximable_verdicts,
    dirichlet_verdicts,
    product_verdicts,
)
from .construct import DEFAULT_ENTRY_BIT_CAP, build_counterexample
from .errors import LabError
from .interval import RatInterval, floor_rat, rat
from .lattice import (
    cross_validate,
    dani_r,
    delta,
    direct_witness_check,
    dynamical_verdicts,
    geometric_s_grid,
)
from .measure import (
    IntervalUnion,
    a_n_set,
    asymptotic_check,
    gauss,
    gauss_map_orbit,
    lebesgue,
    levy_growth_probe,
    main_series,
    mixing_probe,
    monte_carlo_zero_one,
    preimage,
)
from .psi import PsiFunction, fmt_rat, parse_psi
from .ratcf import CFState, cf_expand, cf_expand_certified

PRECISION_ENV = "DIRICHLET_LAB_PRECISION"
DEFAULT_PRECISION = 128

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_UNDECIDED = 3


# ---------------------------------------------------------------------------
# serialization


def _approx(x: mpq) -> str:
    return "~" + format(mpfr(x, 64), ".12g")


def to_jsonable(obj, approx: bool = False):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, type(mpz(0)))):
        return int(obj)
    if isinstance(obj, type(mpq(0))):
        return fmt_rat(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, RatInterval):
        pair = [fmt_rat(obj.lo), fmt_rat(obj.hi)]
        if approx:
            return {"enclosure": pair, "approx": _approx(obj.mid)}
        return pair
    if isinstance(obj, PsiFunction):
        return obj.spec_string()
    if isinstance(obj, IntervalUnion):
        return [[fmt_rat(a), fmt_rat(b)] for a, b in obj.parts]
    if isinstance(obj, CFState):
        out = {
            "entries": [int(a) for a in obj.entries],
            "p": [int(v) for v in obj.p],
            "q": [int(v) for v in obj.q],
        }
        if obj.value is not None:
            out["value"] = fmt_rat(obj.value)
        return out
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name), approx) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, approx) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, approx) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_rational(text: str) -> mpq:
    try:
        return rat(text.strip())
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def parse_pair(text: str) -> tuple[str, str]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")
    return parts[0], parts[1]


def parse_window(text: str) -> tuple[int, int]:
    a, b = parse_pair(text)
    try:
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window bounds must be integers: {text!r}") from None


def parse_rat_pair(text: str) -> tuple[mpq, mpq]:
    a, b = parse_pair(text)
    return parse_rational(a), parse_rational(b)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None


def parse_rat_list(text: str) -> list[mpq]:
    return [parse_rational(v) for v in text.split(",") if v.strip()]


def parse_union(text: str) -> IntervalUnion:
    pairs = [parse_rat_pair(p) for p in text.split(",") if p.strip()]
    return IntervalUnion(tuple(pairs))


def parse_psi_arg(text: str) -> PsiFunction:
    try:
        return parse_psi(text)
    except (ValueError, LabError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_matrix(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return [[parse_rational(text)]]
    if isinstance(data, (str, int)):
        return [[parse_rational(str(data))]]
    if not isinstance(data, list) or not data:
        raise argparse.ArgumentTypeError("matrix must be a non-empty JSON list of rows")
    if not isinstance(data[0], list):
        data = [data]
    return [[parse_rational(str(v)) for v in row] for row in data]


def _x_from_json(doc) -> CFState:
    if isinstance(doc, dict) and "result" in doc:
        doc = doc["result"]
    if isinstance(doc, dict) and "counterexample" in doc:
        doc = doc["counterexample"]
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ValueError("JSON input needs an 'entries' list (optionally with 'value')")
    value = doc.get("value")
    return CFState.from_entries([int(a) for a in doc["entries"]],
                                rat(value) if value is not None else None)


def resolve_x(args, stdin=None) -> tuple[CFState, dict]:
    """Turn the --x-* options into a CFState plus the parameters to echo back."""
    if args.x_rational is not None:
        x = args.x_rational
        whole = floor_rat(x)
        frac = x - whole
        params = {"x_rational": fmt_rat(x)}
        if whole:
            params["integer_part_dropped"] = int(whole)
        return cf_expand(frac), params
    if args.x_entries is not None:
        return CFState.from_entries(args.x_entries), {"x_entries": list(args.x_entries)}
    if args.x_interval is not None:
        lo, hi = args.x_interval
        return (cf_expand_certified(RatInterval(lo, hi)),
                {"x_interval": [fmt_rat(lo), fmt_rat(hi)]})
    if args.x_json is not None:
        if args.x_json == "-":
            text = (stdin or sys.stdin).read()
        else:
            with open(args.x_json, encoding="utf-8") as fh:
                text = fh.read()
        cf = _x_from_json(json.loads(text))
        return cf, {"x_entries": [int(a) for a in cf.entries]}
    raise ValueError("one of --x-rational, --x-entries, --x-interval, --x-json is required")


def _default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PRECISION
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{PRECISION_ENV}={raw!r} is not an integer") from None
    return value


# ---------------------------------------------------------------------------
# subcommands; each returns (parameters, result, undecided)


def _all_undecided(statuses) -> bool:
    statuses = list(statuses)
    return bool(statuses) and all(s is Status.INDETERMINATE for s in statuses)


def cmd_classify(args, ctx):
    cf, params = resolve_x(args, ctx["stdin"])
    params.update(psi=args.psi.spec_string(), window=list(args.window))
    rep = dirichlet_verdicts(cf, args.psi, args.window, ctx["bits"], ctx["retries"])
    return params, rep, _all_undecided(rep.statuses())


def cmd_approx(args, ctx):
    cf, params = resolve_x(args, ctx["stdin"])
    params.update(psi=args.psi.spec_string(), window=list(args.window))
    rep = approximable_verdicts(cf, args.psi, args.window, ctx["bits"], ctx["retries"])
    return params, rep, _all_undecided(rep.statuses())


def cmd_product(args, ctx):
    cf, params = resolve_x(args, ctx["stdin"])
    params.update(psi=args.psi.spec_string(), window=list(args.window))
    rows = product_verdicts(cf, args.psi, args.window, ctx["bits"], ctx["retries"])
    undecided = bool(rows) and all(r.outcome is ProductOutcome.GAP for r in rows)
    return params, {"verdicts": rows}, undecided


def cmd_construct(args, ctx):
    params = {"psi": args.psi.spec_string(), "depth": args.depth}
    cf = build_counterexample(args.psi, args.depth, ctx["bits"], ctx["retries"], args.entry_bit_cap)
    return params, to_jsonable(cf), False


def cmd_series(args, ctx):
    params = {"psi": args.psi.spec_string(), "N": args.N}
    rep = main_series(args.psi, args.N, ctx["bits"])
    out = to_jsonable(rep)
    if not args.all_partial_sums:
        out["partial_sums"] = out["partial_sums"][-1:]
        out["partial_sums_shown"] = "last"
    return params, out, False


def cmd_an_measure(args, ctx):
    u = a_n_set(args.big_psi)
    params = {"big_psi": fmt_rat(args.big_psi)}
    result = {
        "intervals": u,
        "lebesgue": lebesgue(u),
        "gauss": gauss(u, ctx["bits"]),
        "complement": u.complement(),
    }
    return params, result, False


def cmd_asymptotics(args, ctx):
    params = {"values": [fmt_rat(v) for v in args.values]}
    return params, {"rows": asymptotic_check(args.values, ctx["bits"])}, False


def cmd_orbit(args, ctx):
    cf, params = resolve_x(args, ctx["stdin"])
    params["steps"] = args.steps
    orbit = gauss_map_orbit(cf, args.steps)
    if cf.is_exact:
        return params, {"orbit": orbit}, False
    return params, {"orbit_entries": [[int(a) for a in s.entries] for s in orbit],
                    "orbit_cylinders": [s.cylinder for s in orbit]}, False


def cmd_preimage(args, ctx):
    params = {"union": args.union, "iterations": args.iterations, "truncation": args.truncation}
    res = preimage(args.union, args.iterations, args.truncation, ctx["bits"])
    return params, {"preimage": res, "gauss_before": gauss(args.union, ctx["bits"]),
                    "gauss_after": gauss(res.union, ctx["bits"])}, False


def cmd_mixing(args, ctx):
    params = {"word": args.word, "union": args.union, "gap": args.gap,
              "truncation": args.truncation}
    return params, mixing_probe(args.word, args.union, args.gap, args.truncation, ctx["bits"]), False


def cmd_montecarlo(args, ctx):
    params = {"psi": args.psi.spec_string(), "samples": args.samples, "window": list(args.window),
              "sample_bits": args.sample_bits}
    rep = monte_carlo_zero_one(args.psi, args.samples, args.window, args.seed, ctx["bits"],
                               args.sample_bits, ctx["retries"], ctx["threads"])
    out = to_jsonable(rep)
    if not args.per_sample:
        out.pop("outcomes")
    return params, out, False


def cmd_levy(args, ctx):
    params = {"samples": args.samples, "depth": args.depth}
    return params, levy_growth_probe(args.samples, args.depth, args.seed), False


def cmd_dani_r(args, ctx):
    params = {"psi": args.psi.spec_string(), "m": args.m, "n": args.n, "s": fmt_rat(args.s)}
    r = dani_r(args.psi, args.m, args.n, args.s, args.tol_bits)
    return params, {"r": r}, False


def cmd_delta(args, ctx):
    params = {"matrix": args.matrix, "s": fmt_rat(args.s)}
    return params, delta(args.matrix, args.s, ctx["bits"]), False


def cmd_dyn_classify(args, ctx):
    m, n = len(args.matrix), len(args.matrix[0])
    grid = args.s_grid or geometric_s_grid(args.psi, m, n, args.count, args.ratio, ctx["bits"])
    params = {"matrix": args.matrix, "psi": args.psi.spec_string(), "s_grid": grid}
    rep = dynamical_verdicts(args.matrix, args.psi, grid, ctx["bits"], ctx["retries"])
    return params, rep, _all_undecided(v.status for v in rep.verdicts)


def cmd_witness(args, ctx):
    params = {"matrix": args.matrix, "psi": args.psi.spec_string(),
              "horizon": [fmt_rat(v) for v in args.horizon]}
    rep = direct_witness_check(args.matrix, args.psi, args.horizon, ctx["bits"])
    out = to_jsonable(rep)
    if not args.intervals:
        out.pop("intervals")
    return params, out, False


def cmd_cross_validate(args, ctx):
    cf, params = resolve_x(args, ctx["stdin"])
    params.update(psi=args.psi.spec_string(), window=list(args.window))
    rep = cross_validate(cf, args.psi, args.window, args.s_grid, ctx["bits"], ctx["retries"],
                         raise_on_conflict=False)
    out = to_jsonable(rep)
    out["consistent"] = rep.consistent
    if not args.intervals:
        out["witness"].pop("intervals")
    if not rep.consistent:
        raise _Inconsistent(params, out)
    return params, out, _all_undecided(p.lattice for p in rep.points)


class _Inconsistent(Exception):
    def __init__(self, params, out):
        self.params, self.out = params, out


# ---------------------------------------------------------------------------
# CSV renderers for the flat tables


def _csv_asymptotics(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["big_psi", "lebesgue", "ratio_lo", "ratio_hi", "upper_lo", "upper_hi",
                "lower_lo", "lower_hi"])
    for row in result["rows"]:
        w.writerow([fmt_rat(row.big_psi), fmt_rat(row.lebesgue),
                    fmt_rat(row.ratio.lo), fmt_rat(row.ratio.hi),
                    fmt_rat(row.upper_bound.lo), fmt_rat(row.upper_bound.hi),
                    fmt_rat(row.lower_bound.lo), fmt_rat(row.lower_bound.hi)])
    return buf.getvalue()


def _csv_montecarlo(result, params, seed) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["psi", "seed", "samples", "window", "sample_bits", "fraction_no_violation",
                "violated_samples", "indeterminate_samples", "indeterminate_verdicts"])
    w.writerow([params["psi"], seed, result["samples"], "{}:{}".format(*result["window"]),
                result["sample_bits"], result["fraction_no_violation"],
                result["violated_samples"], result["indeterminate_samples"],
                result["indeterminate_verdicts"]])
    return buf.getvalue()


CSV_RENDERERS = {"asymptotics", "montecarlo"}


# ---------------------------------------------------------------------------
# parser


def _add_x(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x-rational", type=parse_rational, help="exact rational, e.g. 5/8")
    g.add_argument("--x-entries", type=parse_int_list, help="continued-fraction prefix, e.g. 1,1,1")
    g.add_argument("--x-interval", type=parse_rat_pair,
                   help="rational enclosure lo:hi; the shared prefix of both ends is used")
    g.add_argument("--x-json", metavar="PATH",
                   help="JSON document with 'entries' (e.g. construct output); '-' reads stdin")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None,
                        help=f"working precision in bits (default ${PRECISION_ENV} or {DEFAULT_PRECISION})")
    common.add_argument("--retries", type=int, default=3, help="precision doublings on overlap")
    common.add_argument("--threads", type=int, default=1, help="worker processes where supported")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--approx", action="store_true",
                        help="add approximate decimal renderings next to enclosures")
    common.add_argument("--require-decision", action="store_true",
                        help="exit 3 when every verdict is Indeterminate")

    parser = argparse.ArgumentParser(prog="dirichlet-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    psi_kw = dict(type=parse_psi_arg, required=True,
                  help='e.g. "scaled_dirichlet c=7/10" or "power_gap a=1 k=1/2"')

    for name, func, text in (("classify", cmd_classify, "per-index Dirichlet verdicts"),
                             ("approx", cmd_approx, "per-convergent approximability verdicts")):
        p = add(name, func, text)
        _add_x(p)
        p.add_argument("--psi", **psi_kw)
        p.add_argument("--window", type=parse_window, required=True, help="index range a:b")

    p = add("product", cmd_product, "product-of-entries criterion per index")
    _add_x(p)
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--window", type=parse_window, required=True)

    p = add("construct", cmd_construct, "build a certified non-Dirichlet prefix")
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--entry-bit-cap", type=int, default=DEFAULT_ENTRY_BIT_CAP)

    p = add("series", cmd_series, "partial sums and closed-form class of the main series")
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--all-partial-sums", action="store_true")

    p = add("an-measure", cmd_an_measure, "exact set {a_1 a_2 > Psi} and its measures")
    p.add_argument("--big-psi", type=parse_rational, required=True)

    p = add("asymptotics", cmd_asymptotics, "measure of {a_1 a_2 > Psi} against log(Psi)/Psi")
    p.add_argument("--values", type=parse_rat_list, default=[mpq(10) ** e for e in range(2, 7)])

    p = add("orbit", cmd_orbit, "Gauss-map orbit")
    _add_x(p)
    p.add_argument("--steps", type=int, default=10)

    p = add("preimage", cmd_preimage, "truncated Gauss-map preimage of an interval union")
    p.add_argument("--union", type=parse_union, required=True, help="e.g. 0:1/2,2/3:1")
    p.add_argument("--iterations", type=int, default=1)
    p.add_argument("--truncation", type=int, default=64)

    p = add("mixing", cmd_mixing, "mixing ratio for a cylinder and a target union")
    p.add_argument("--word", type=parse_int_list, required=True)
    p.add_argument("--union", type=parse_union, required=True)
    p.add_argument("--gap", type=int, default=1)
    p.add_argument("--truncation", type=int, default=64)

    p = add("montecarlo", cmd_montecarlo, "seeded zero-one experiment")
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--window", type=parse_window, default=(10, 60))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-bits", type=int, default=256)
    p.add_argument("--per-sample", action="store_true")

    p = add("levy", cmd_levy, "growth of convergent denominators on seeded samples")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = add("dani-r", cmd_dani_r, "radius function of the lattice correspondence")
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--s", type=parse_rational, required=True)
    p.add_argument("--tol-bits", type=int, default=64)

    p = add("delta", cmd_delta, "minus log of the shortest sup-norm vector of the flowed lattice")
    p.add_argument("--matrix", type=parse_matrix, required=True,
                   help='JSON rows, e.g. [["5/8"]], or a single rational')
    p.add_argument("--s", type=parse_rational, required=True)

    p = add("dyn-classify", cmd_dyn_classify, "lattice-side verdicts on a grid of times")
    p.add_argument("--matrix", type=parse_matrix, required=True)
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--s-grid", type=parse_rat_list)
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--ratio", type=parse_rational, default=mpq(5, 4))

    p = add("witness", cmd_witness, "coverage of a time range by witness intervals")
    p.add_argument("--matrix", type=parse_matrix, required=True)
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--horizon", type=parse_rat_pair, required=True, help="T0:T1")
    p.add_argument("--intervals", action="store_true", help="include every witness interval")

    p = add("cross-validate", cmd_cross_validate, "index vs lattice vs witness consistency")
    _add_x(p)
    p.add_argument("--psi", **psi_kw)
    p.add_argument("--window", type=parse_window, required=True)
    p.add_argument("--s-grid", type=parse_rat_list)
    p.add_argument("--intervals", action="store_true")

    return parser


def _seed_of(args):
    return getattr(args, "seed", None)


def _envelope(args, bits, params, result):
    doc = {
        "tool_version": __version__,
        "command": args.command,
        "parameters": params,
        "precision_bits": bits,
        "retries": args.retries,
    }
    seed = _seed_of(args)
    if seed is not None:
        doc["seed"] = seed
    doc["result"] = to_jsonable(result, args.approx)
    return doc


def main(argv=None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        bits = args.precision if args.precision is not None else _default_precision()
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PRECONDITION
    if bits < 16:
        print(f"error: precision must be at least 16 bits, got {bits}", file=stderr)
        return EXIT_PRECONDITION
    if args.format == "csv" and args.command not in CSV_RENDERERS:
        print(f"error: --format csv is only available for {sorted(CSV_RENDERERS)}", file=stderr)
        return EXIT_PRECONDITION
    ctx = {"bits": bits, "retries": args.retries, "threads": args.threads, "stdin": stdin}
    try:
        params, result, undecided = args.func(args, ctx)
    except _Inconsistent as exc:
        json.dump(_envelope(args, bits, exc.params, exc.out), stdout, indent=2)
        stdout.write("\n")
        print("error: certified contradiction between the criteria", file=stderr)
        return EXIT_PRECONDITION
    except (LabError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_PRECONDITION
    params = to_jsonable(params)
    try:
        _emit(args, bits, params, result, stdout)
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); nothing left to report
        return EXIT_OK
    if undecided and args.require_decision:
        print("undecided: every verdict is Indeterminate", file=stderr)
        return EXIT_UNDECIDED
    return EXIT_OK


def _emit(args, bits, params, result, stdout):
    if args.format == "csv":
        if args.command == "asymptotics":
            stdout.write(_csv_asymptotics(result))
        else:
            stdout.write(_csv_montecarlo(result, params, _seed_of(args)))
    else:
        json.dump(_envelope(args, bits, params, result), stdout, indent=2)
        stdout.write("\n")


run = main

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
