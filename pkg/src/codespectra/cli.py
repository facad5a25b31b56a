"""Command-line front end.

Every command writes a self-describing document (the full invoking
configuration plus results) as JSON or CSV, to ``--out`` or stdout.

Exit codes: 0 success, 2 usage or parse error, 3 constraint violation,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction

from . import analysis as an
from . import montecarlo as mc
from .constructions import (
    LDGM,
    RLC,
    CHKParallel,
    LinearCodeMatrix,
    REPParallel,
    as_ensemble,
    exhaustive_expected_spectrum,
    ldgm_output_length,
    make_rng,
    sample_ldgm,
    sample_rlc,
)
from .field import FieldError, MatrixFormatError, format_matrix, parse_matrix
from .spectra import (
    DEFAULT_LIMIT,
    EnumerationLimitError,
    SpectrumError,
    ambient_spectrum,
    all_types,
    joint_spectrum_of_map,
    kernel_spectrum,
    marginals_and_conditionals,
)

EXIT_OK, EXIT_USAGE, EXIT_CONSTRAINT, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(Exception):
    pass


class ConstraintError(Exception):
    pass


def frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in cfg.items()}


# -- output ------------------------------------------------------------------

def _render(doc: dict, rows: list[dict] | None, fmt: str) -> str:
    if fmt == "json" or rows is None:
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(doc["config"], sort_keys=True) + "\n")
    for w in doc.get("warnings", []):
        buf.write(f"# warning: {w}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _write(text: str, out: str | None):
    if not out:
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, result, rows=None, warnings=()):
    doc = {"command": args.command, "config": _config(args)}
    if warnings:
        doc["warnings"] = list(warnings)
    doc["result"] = result
    _write(_render(doc, rows, args.format), args.out)


# -- commands ----------------------------------------------------------------

def _spectrum_rows(S) -> list[dict]:
    if S.arity == 1:
        return [{"P": " ".join(map(str, P.counts)), "value": frac(v)} for P, v in S.items()]
    return [
        {"P": " ".join(map(str, P.counts)), "Q": " ".join(map(str, Q.counts)), "value": frac(v)}
        for (P, Q), v in S.items()
    ]


def cmd_spectrum(args):
    try:
        with open(args.matrix) as fh:
            G = parse_matrix(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.matrix}: {exc}") from None
    code = LinearCodeMatrix(G)
    S = joint_spectrum_of_map(code, limit=args.limit)
    parts = marginals_and_conditionals(S)
    result = {
        "q": code.q, "n": code.n, "m": code.m, "rate": frac(code.rate), "rank": code.rank(),
        "joint": S.to_dict(),
        "input_marginal": parts.x.to_dict(),
        "output_marginal": parts.y.to_dict(),
        "forward_conditional": parts.y_given_x.to_dict(),
        "backward_conditional": parts.x_given_y.to_dict(),
        "kernel": kernel_spectrum(code, limit=args.limit).to_dict(),
    }
    _emit(args, result, _spectrum_rows(S))


def _code_summary(code: LinearCodeMatrix, limit: int) -> dict:
    G = code.generator
    out = {
        "matrix": format_matrix(G),
        "rate": frac(code.rate),
        "rank": code.rank(),
        "row_weights": G.row_weights(),
        "column_weights": G.column_weights(),
    }
    if code.q**code.n <= limit:
        out["joint_spectrum"] = joint_spectrum_of_map(code, limit=limit).to_dict()
    return out


def cmd_rlc(args):
    _need(args, "q", "n", "m")
    code = sample_rlc(args.q, args.n, args.m, make_rng(args.seed, 0))
    result = _code_summary(code, args.limit)
    _emit(args, result, [{"row": i, "entries": " ".join(map(str, r))} for i, r in enumerate(code.generator.entries)])


def cmd_ldgm(args):
    _need(args, "q", "n", "c", "d")
    try:
        ldgm_output_length(args.n, args.c, args.d)
    except ValueError as exc:
        raise ConstraintError(str(exc)) from None
    warnings = []
    if args.q == 2:
        warnings.append("q = 2: the LDGM goodness guarantee needs q > 2 (check sums of nonzero inputs "
                        "do not become uniform); the code is built anyway")
        print("warning: " + warnings[-1], file=sys.stderr)
    s = sample_ldgm(args.q, args.n, args.c, args.d, make_rng(args.seed, 0))
    result = _code_summary(s.code, args.limit)
    result["interleaver"] = list(s.interleaver.perm)
    result["check_coefficients"] = [list(c) for c in s.coeffs]
    _emit(args, result, [{"row": i, "entries": " ".join(map(str, r))} for i, r in enumerate(s.code.generator.entries)],
          warnings)


def _grid(step: float) -> list[float]:
    k = round(1 / step)
    if k < 1 or abs(k * step - 1) > 1e-9:
        raise UsageError(f"--grid {step} must divide 1")
    return [i / k for i in range(k + 1)]


def cmd_delta_d(args):
    _need(args, "q", "d")
    rows = []
    for x in _grid(args.grid):
        for y in _grid(args.grid):
            r = an.delta_d(args.q, args.d, x, y, tol=args.tol)
            rows.append({"q": args.q, "d": args.d, "x": repr(x), "y": repr(y),
                         "value": repr(r.value), "minimizer": repr(r.minimizer)})
    # x = 1/q is the zero of the exponent; the grid rarely hits it exactly
    spot = [{"x": repr(1 / args.q), "y": repr(y), "value": repr(an.delta_d(args.q, args.d, 1 / args.q, y, tol=args.tol).value)}
            for y in _grid(args.grid)]
    result = {"table": rows, "spot_x_eq_1_over_q": spot}
    if args.gamma is not None:
        s, sx, sy = an.sup_delta_d(args.q, args.d, float(args.gamma))
        result["sup"] = {"gamma": str(args.gamma), "value": s, "x": sx, "y": sy}
        if args.delta is not None:
            ratio = Fraction(args.c, args.d) if args.c else Fraction(1)
            result["d0"] = an.d0(float(args.gamma), float(args.delta), args.q, ratio)
    _emit(args, result, rows)


def cmd_rank(args):
    _need(args, "q", "n", "m")
    if args.m > args.n:
        raise ConstraintError(f"m={args.m} > n={args.n}: full row rank is impossible")
    p = an.rank_full_probability(args.q, args.n, args.m)
    bounds = [{"k": k, "lower_bound": frac(b), "decimal": float(b)}
              for k in range(1, args.m + 1) for b in [an.rank_lower_bound(args.q, args.n, args.m, k)]]
    result = {"probability": frac(p), "decimal": float(p), "lower_bounds": bounds}
    if args.m == args.n:
        result["limit_bound"] = 1 - 1 / args.q - 1 / args.q**2
    if args.trials:
        result["monte_carlo"] = mc.estimate_rank_rate(args.q, args.n, args.m, args.trials, args.seed).to_dict()
    rows = [{"quantity": "probability", "exact": frac(p), "decimal": repr(float(p))}]
    rows += [{"quantity": f"lower_bound_k{b['k']}", "exact": b["lower_bound"], "decimal": repr(b["decimal"])}
             for b in bounds]
    _emit(args, result, rows)


def _ensemble(args):
    kind = args.ensemble
    if kind == "rlc":
        _need(args, "q", "n", "m")
        return RLC(q=args.q, n=args.n, m=args.m, seed=args.seed)
    if kind == "chk":
        _need(args, "q", "d", "m")
        return CHKParallel(q=args.q, d=args.d, m=args.m, seed=args.seed)
    if kind == "rep":
        _need(args, "q", "c", "n")
        return REPParallel(q=args.q, c=args.c, n=args.n, seed=args.seed)
    if kind == "ldgm":
        _need(args, "q", "n", "c", "d")
        try:
            return LDGM(q=args.q, n=args.n, c=args.c, d=args.d, seed=args.seed)
        except ValueError as exc:
            raise ConstraintError(str(exc)) from None
    if kind == "matrix":
        if not args.matrix:
            raise UsageError("--ensemble matrix needs --matrix FILE")
        with open(args.matrix) as fh:
            return as_ensemble(LinearCodeMatrix(parse_matrix(fh.read())))
    raise UsageError(f"unknown ensemble {kind}")


def _expected_spectrum(ens, limit):
    if isinstance(ens, LDGM):
        cond = an.ldgm_expected_conditional(ens.q, ens.n, ens.c, ens.d)
        amb = ambient_spectrum(ens.n, ens.q)
        from .spectra import Spectrum

        return Spectrum({(P, Q): v * amb[P] for P in cond.conditioning_types() for Q, v in cond.given(P).items()},
                        ens.q, ens.n, ens.q, cond.n_out)
    if isinstance(ens, CHKParallel):
        return an.expected_chk_parallel_table(ens.q, ens.d, ens.m)
    return exhaustive_expected_spectrum(ens, limit=limit)


def cmd_goodness(args):
    ens = _ensemble(args)
    E = _expected_spectrum(ens, args.limit)
    val, arg, ratio = an.jscc_goodness(E, detail=True)
    result = {"ensemble": ens.to_dict(), "jscc_goodness": val, "argmax": [list(arg[0].counts), list(arg[1].counts)],
              "max_alpha": frac(ratio)}
    rows = [{"quantity": "jscc_goodness", "value": repr(val)}]
    if not isinstance(ens, LDGM) and ens.count() <= 1 << 16:
        ival = an.image_goodness(an.exhaustive_expected_image_spectrum(ens))
        result["image_goodness"] = ival
        rows.append({"quantity": "image_goodness", "value": repr(ival)})
    if isinstance(ens, LDGM) and args.gamma is not None:
        gamma = Fraction(args.gamma)
        reports = [an.ldgm_alpha_bound(ens.q, ens.n, ens.c, ens.d, P, Q)
                   for P in all_types(ens.q, ens.n) if not P.is_zero() and 1 - P[0] > gamma
                   for Q in all_types(ens.q, ens.n_out)]
        result["bounds"] = [r.to_dict() for r in reports]
        result["all_bounds_satisfied"] = all(r.satisfied for r in reports)
    _emit(args, result, rows)


def cmd_mc(args):
    ens = _ensemble(args)
    if not args.trials or args.trials < 2:
        raise UsageError("--trials must be at least 2")
    est = mc.estimate_expected_spectrum(ens, args.trials, args.seed, limit=args.limit)
    exact = None
    try:
        exact = _expected_spectrum(ens, args.limit)
    except EnumerationLimitError:
        pass
    rows = []
    for (P, Q), e in est.items():
        row = {"P": " ".join(map(str, P.counts)), "Q": " ".join(map(str, Q.counts)),
               "mean": repr(e.mean), "std_err": repr(e.std_err)}
        if exact is not None:
            x = exact[(P, Q)]
            z = e.z_score(x)
            row.update(exact=frac(x), z=repr(z) if math.isfinite(z) else str(z))
        rows.append(row)
    result = {"ensemble": ens.to_dict(), "trials": args.trials, "seed": args.seed, "estimates": rows}
    _emit(args, result, rows)


def cmd_genfun(args):
    _need(args, "q", "d")
    g = an.expected_chk_genfun(args.q, args.d)
    _emit(args, {"variables": [f"u{a}" for a in range(args.q)] + [f"v{a}" for a in range(args.q)],
                 "terms": g.to_dict()},
          [{"exponents": " ".join(map(str, t["exponents"])), "coef": t["coef"]} for t in g.to_dict()])


def cmd_verify(args):
    from .verify import run_all

    results = run_all(args.check or None)
    _emit(args, {"checks": results, "all_ok": all(r["ok"] for r in results)},
          [{"check": r["check"], "ok": r["ok"], "detail": r["detail"]} for r in results])
    for r in results:
        if not r["ok"]:
            print(f"FAILED {r['check']}: {r['detail']}", file=sys.stderr)
    return EXIT_OK if all(r["ok"] for r in results) else EXIT_VERIFY


# -- parser ------------------------------------------------------------------

def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command} needs {' '.join(missing)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag in ("q", "n", "m", "c", "d"):
        common.add_argument(f"--{flag}", type=int)
    common.add_argument("--gamma", type=Fraction)
    common.add_argument("--delta", type=Fraction)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")

    p = argparse.ArgumentParser(prog="codespectra", description="Exact and Monte Carlo spectra of linear codes over F_q.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="joint/marginal/conditional/kernel spectra of a matrix file")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_spectrum)

    sub.add_parser("rlc", parents=[common], help="sample a random linear code").set_defaults(func=cmd_rlc)
    sub.add_parser("ldgm", parents=[common], help="sample a regular LDGM code").set_defaults(func=cmd_ldgm)

    s = sub.add_parser("delta-d", parents=[common], help="table of the LDGM exponent delta_d(x, y)")
    s.add_argument("--grid", type=float, default=0.05)
    s.set_defaults(func=cmd_delta_d)

    sub.add_parser("rank", parents=[common], help="full-rank probability of random matrices").set_defaults(func=cmd_rank)

    for name, fn, hlp in (("goodness", cmd_goodness, "exact JSCC/image goodness of an ensemble"),
                          ("mc", cmd_mc, "Monte Carlo expected spectrum of an ensemble")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--ensemble", choices=("rlc", "chk", "rep", "ldgm", "matrix"), required=True)
        s.add_argument("--matrix")
        s.set_defaults(func=fn)

    sub.add_parser("genfun", parents=[common], help="expected generating function of a random check code").set_defaults(
        func=cmd_genfun)

    s = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    s.add_argument("--check", action="append", help="run only the named check (repeatable)")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (UsageError, MatrixFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConstraintError, EnumerationLimitError, FieldError, SpectrumError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
