"""Command-line surface: table commands, the verification suite, caching.

Table commands emit JSON lines (or CSV via --format csv, same fields in
the same order); `verify` emits a single JSON report.  Exit codes:
0 success, 1 verification failure, 2 usage error, 3 the computation
could not meet its precision/budget contract.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from . import reports
from .analytic import (
    _parse_fspec,
    duke_statistic,
    exact_formula_tJ,
    regularized_average,
    trace,
    trace_table,
)
from .cache import Cache, cache_key
from .qform import QuadForm, enumerate_reduced, hurwitz, is_fundamental, reduce, stabilizer_order
from .series import (
    bigJ_series,
    delta_series,
    eisenstein,
    faber,
    g_series,
    j_series,
    t_series,
    theta_series,
)
from .sums import poincare_coeff
from .thetalift import theta_integral
from .verify import FULL_CHECKS, run_suite


@dataclass(frozen=True)
class Config:
    precision_bits: int = 64
    threads: int = 1
    cache_dir: object = None
    default_c_max: int = 10 ** 5
    default_tol: float = 1e-4

    def validate(self):
        if self.precision_bits < 64:
            raise ValueError("--precision must be at least 64 bits")
        if self.threads < 1:
            raise ValueError("--threads must be at least 1")


# -- argument converters (bad values exit 2 through argparse) ---------------

def _range_arg(text: str):
    lo, _, hi = text.partition(":")
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if lo > hi or lo < 0:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return (lo, hi)


def _form_arg(text: str):
    try:
        a, b, c = (int(t) for t in text.split(","))
        return QuadForm(a, b, c)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a,b,c positive definite: {exc}")


def _fspec_arg(text: str):
    try:
        _parse_fspec(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def _tau_arg(text: str):
    try:
        return complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a complex like 0.5+2j, got {text!r}")


def _admissible(lo: int, hi: int):
    return [D for D in range(max(lo, 3), hi + 1) if D % 4 in (0, 3)]


def _resolve_Ds(args):
    if args.D is not None:
        return [args.D]
    return _admissible(*args.range)


# -- subcommands ------------------------------------------------------------

def cmd_reduce(args, cfg, cache):
    R = reduce(args.form)
    rows = [{"D": R.D, "a": R.a, "b": R.b, "c": R.c,
             "stabilizer": stabilizer_order(R)}]
    return reports.render_table(rows, reports.FORM_FIELDS, args.format), 0


def cmd_forms(args, cfg, cache):
    rows = []
    for D in _resolve_Ds(args):
        for F in enumerate_reduced(D):
            rows.append({"D": D, "a": F.a, "b": F.b, "c": F.c,
                         "stabilizer": stabilizer_order(F)})
    return reports.render_table(rows, reports.FORM_FIELDS, args.format), 0


def cmd_classnum(args, cfg, cache):
    if args.D is not None:
        Ds = [args.D]
    else:
        Ds = list(range(args.range[0], args.range[1] + 1))
    key = cache_key("classnum", {"Ds": Ds}, "exact")
    rows = cache.get(key)
    if rows is None:
        rows = [{"D": D, "H": hurwitz(D)} for D in Ds]
        cache.put(key, rows)
    return reports.render_table(rows, reports.CLASSNUM_FIELDS, args.format), 0


def cmd_trace(args, cfg, cache):
    Ds = _resolve_Ds(args)
    key = cache_key("trace", {"f": args.f, "Ds": Ds, "p": args.level},
                    args.precision or "policy")
    rows = cache.get(key)
    if rows is None:
        if args.precision is not None:
            entries = [trace(args.f, D, args.level, args.precision) for D in Ds]
        else:
            entries = trace_table(args.f, Ds, p=args.level, threads=cfg.threads)
        rows = [{"D": e.D, "p": e.p, "f": e.f_label,
                 "trace": e.value_rounded, "residual": e.residual,
                 "certified": e.certified, "precision": e.precision}
                for e in entries]
        cache.put(key, rows)
    code = 0 if all(r["certified"] for r in rows) else 3
    return reports.render_table(rows, reports.TRACE_FIELDS, args.format), code


_SERIES = {
    "g": g_series, "t": t_series, "j": j_series, "J": bigJ_series,
    "delta": delta_series, "theta": theta_series,
    "E4": lambda t: eisenstein(4, t), "E6": lambda t: eisenstein(6, t),
}


def cmd_series(args, cfg, cache):
    name = args.name
    if name in _SERIES:
        s = _SERIES[name](args.dmax + 1)
    elif name.startswith("J") and name[1:].isdigit():
        s = faber(int(name[1:]), args.dmax + 1)
    else:
        raise ValueError(f"unknown series {name!r}; know {sorted(_SERIES)} and Jm")
    rows = [{"exponent": int(e) if e.denominator == 1 else e, "coefficient": c}
            for e, c in s.items() if e <= args.dmax]
    return reports.render_table(rows, reports.SERIES_FIELDS, args.format), 0


def cmd_exactformula(args, cfg, cache):
    Ds = _resolve_Ds(args)
    cmax = args.cmax or 10 ** 4
    prec = args.precision or 53
    key = cache_key("exactformula", {"Ds": Ds, "c_max": cmax}, prec)
    rows = cache.get(key)
    if rows is None:
        rows = []
        for D in Ds:
            r = exact_formula_tJ(D, c_max=cmax, precision=prec)
            rows.append({"D": D, "c_max": cmax, "value": float(r.value),
                         "error_bound": r.error_bound})
        cache.put(key, rows)
    return reports.render_table(rows, reports.EXACTFORMULA_FIELDS, args.format), 0


def cmd_poincare(args, cfg, cache):
    cmax = args.cmax or cfg.default_c_max
    prec = args.precision or 53
    key = cache_key("poincare", {"k": args.k, "m": args.m, "n": args.n,
                                 "c_max": cmax}, prec)
    rows = cache.get(key)
    if rows is None:
        r = poincare_coeff(args.k, args.m, args.n, cmax, precision=prec)
        rows = [{"k": args.k, "m": args.m, "n": args.n, "c_max": cmax,
                 "value": float(r.value), "error_bound": r.error_bound}]
        cache.put(key, rows)
    return reports.render_table(rows, reports.POINCARE_FIELDS, args.format), 0


def cmd_duke(args, cfg, cache):
    rows = []
    for D in _admissible(*args.range):
        rows.append({"D": D, "statistic": float(duke_statistic(D).value),
                     "H": hurwitz(D), "fundamental": is_fundamental(D)})
    return reports.render_table(rows, reports.DUKE_FIELDS, args.format), 0


def cmd_theta(args, cfg, cache):
    tol = args.tol or cfg.default_tol
    r = theta_integral(args.h, args.tau, args.f, tol=tol)
    rows = [{"h": args.h, "tau": repr(args.tau), "f": args.f, "tol": tol,
             "integral_re": float(r.value.real),
             "integral_im": float(r.value.imag),
             "error_bound": r.error_bound}]
    return reports.render_table(rows, reports.THETA_FIELDS, args.format), 0


def cmd_avg(args, cfg, cache):
    r = regularized_average(args.f, precision=args.precision or 53)
    rows = [{"f": args.f, "value": float(r.value), "error_bound": r.error_bound}]
    return reports.render_table(rows, reports.AVG_FIELDS, args.format), 0


def cmd_verify(args, cfg, cache):
    what = args.what
    if what in ("fast", "full"):
        level, only = what, None
    else:
        level, only = "fast", what
    t0 = time.time()
    results, passed = run_suite(level, only=only, threads=cfg.threads,
                                dmax=args.dmax, cmax=args.cmax, tol=args.tol)
    outputs = [{"check": r.name, "identity": r.identity, "passed": r.passed,
                "detail": r.detail, "seconds": round(r.seconds, 3)}
               for r in results]
    rep = reports.make_report(
        "verify",
        {"what": what, "dmax": args.dmax, "cmax": args.cmax,
         "tol": args.tol, "threads": cfg.threads},
        outputs,
        "each row names the modular identity it validates",
        passed=passed, seconds=time.time() - t0)
    for r in results:
        if not r.passed:
            print(f"FAIL {r.name}: {r.identity}", file=sys.stderr)
    return reports.render_report(rep), (0 if passed else 1)


# -- parser / driver --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, default=None, metavar="BITS")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--cache-dir", default=None, metavar="PATH")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, metavar="PATH")

    p = argparse.ArgumentParser(prog="cmtrace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("reduce", cmd_reduce, "reduce a positive definite form")
    sp.add_argument("--form", type=_form_arg, required=True, metavar="a,b,c")

    for name, fn, help in (("forms", cmd_forms, "reduced forms of discriminant -D"),
                           ("classnum", cmd_classnum, "Hurwitz class numbers"),
                           ("trace", cmd_trace, "CM-value traces"),
                           ("exactformula", cmd_exactformula,
                            "truncated exponential-sum formula for the J-trace")):
        sp = add(name, fn, help)
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--D", type=int, default=None)
        g.add_argument("--range", type=_range_arg, default=None, metavar="LO:HI")
        if name == "trace":
            sp.add_argument("--f", type=_fspec_arg, default="J")
            sp.add_argument("--level", type=int, default=1, metavar="p")
        if name == "exactformula":
            sp.add_argument("--cmax", type=int, default=None)

    sp = add("series", cmd_series, "q-expansion coefficients of a named series")
    sp.add_argument("--name", required=True)
    sp.add_argument("--dmax", type=int, default=25)

    sp = add("poincare", cmd_poincare, "Rademacher-type coefficient of a Poincare series")
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--cmax", type=int, default=None)

    sp = add("duke", cmd_duke, "per-discriminant equidistribution statistic")
    sp.add_argument("--range", type=_range_arg, required=True, metavar="LO:HI")

    sp = add("theta", cmd_theta, "regularized theta-lift component integral")
    sp.add_argument("--h", type=int, default=0)
    sp.add_argument("--tau", type=_tau_arg, required=True, metavar="x+yj")
    sp.add_argument("--f", type=_fspec_arg, default="1")
    sp.add_argument("--tol", type=float, default=None)

    sp = add("avg", cmd_avg, "regularized average over the modular curve")
    sp.add_argument("--f", type=_fspec_arg, required=True)

    sp = add("verify", cmd_verify, "run the verification suite or one check")
    sp.add_argument("what", nargs="?", default="fast",
                    choices=["fast", "full"] + sorted(FULL_CHECKS),
                    help="fast, full, or a single check name")
    sp.add_argument("--dmax", type=int, default=None)
    sp.add_argument("--cmax", type=int, default=None)
    sp.add_argument("--tol", type=float, default=None)

    return p


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    cfg = Config(precision_bits=getattr(args, "precision", None) or 64,
                 threads=args.threads, cache_dir=args.cache_dir)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2

    cache = Cache(directory=args.cache_dir, enabled=not args.no_cache)
    try:
        text, code = args.fn(args, cfg, cache)
    except (ValueError, NotImplementedError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
