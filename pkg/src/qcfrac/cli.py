"""Command-line front end.

Subcommands
-----------
eval
    Evaluate one continued fraction or one closed form at an explicit
    parameter point.
check
    Run a named verification suite over sampled points and emit a
    JSON or CSV report; exit status 0 iff every record passes.
sweep
    Scan depth or precision at an explicit point and report the drift
    between successive settings.

Parameter points are given inline (``--params a=0.5,b=0.3,...``) or as a
flat JSON file of decimal strings / [re, im] decimal-string pairs
(``--params point.json``), which may also carry ``q``.  The environment
variable ``QCFRAC_PRECISION_BITS`` overrides the default precision only;
an explicit ``--precision-bits`` always wins.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, Optional

from mpmath import mpf

from .context import QContext, scalar_to_json
from .errors import ConfigError, QSeriesError
from .harness import CHECK_NAMES, CheckSpec, Report, run_check
from .recurrence import MassonParams
from .cfrac import (
    CFMethod,
    Corollary3CF,
    Corollary3Params,
    MassonCF,
    corollary2_rhs,
    corollary3_bridge,
    corollary3_rhs,
    eval_cf,
    pincherle_value,
    theorem1_rhs,
)

EVAL_TARGETS = ("cf", "pincherle", "theorem1", "corollary2", "corollary3",
                "corollary3_cf")


def _default_precision() -> int:
    env = os.environ.get("QCFRAC_PRECISION_BITS")
    if env is None:
        return 53
    try:
        return int(env)
    except ValueError:
        raise ConfigError(
            f"QCFRAC_PRECISION_BITS must be an integer, got {env!r}")


def _parse_params(text: Optional[str]) -> Dict:
    """Inline ``a=0.5,b=0.3`` or a path to a flat JSON object."""
    if not text:
        return {}
    if os.path.exists(text) or text.endswith(".json"):
        with open(text, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ConfigError("parameter file must hold a flat JSON object")
        return doc
    out = {}
    for item in text.split(","):
        if "=" not in item:
            raise ConfigError(f"malformed inline parameter {item!r}")
        key, _, val = item.partition("=")
        out[key.strip()] = val.strip()
    return out


def _context(args, params: Dict) -> QContext:
    q = args.q if args.q is not None else params.get("q")
    if q is None:
        raise ConfigError("q is required (--q or a 'q' entry in --params)")
    return QContext(
        q=q,
        series_tol=args.series_tol,
        identity_tol=args.identity_tol,
        precision_bits=args.precision_bits,
    )


def _masson_point(params: Dict, ctx: QContext) -> MassonParams:
    missing = [k for k in ("a", "b", "c", "d", "e", "f") if k not in params]
    if missing:
        raise ConfigError(f"missing Masson parameters: {', '.join(missing)}")
    return MassonParams(*[ctx.scalar(params[k])
                          for k in ("a", "b", "c", "d", "e", "f")], ctx)


def _reduced_point(params: Dict, ctx: QContext) -> Corollary3Params:
    missing = [k for k in ("a", "b", "c", "d", "e") if k not in params]
    if missing:
        raise ConfigError(f"missing reduced parameters: {', '.join(missing)}")
    return Corollary3Params(*[ctx.scalar(params[k])
                              for k in ("a", "b", "c", "d", "e")], ctx=ctx)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--q", help="base q (decimal string)")
    parser.add_argument("--params", help="inline a=..,b=.. or JSON file path")
    parser.add_argument("--depth", type=int, default=200,
                        help="continued-fraction truncation depth")
    parser.add_argument("--series-tol", type=float, default=1e-13)
    parser.add_argument("--identity-tol", type=float, default=1e-8)
    parser.add_argument("--precision-bits", type=int,
                        default=_default_precision())


def _cmd_eval(args) -> int:
    params = _parse_params(args.params)
    ctx = _context(args, params)
    what = args.what
    doc = {"target": what, "q": scalar_to_json(ctx.q)}
    method = CFMethod(args.method)
    if what in ("cf", "pincherle", "theorem1", "corollary2"):
        p = _masson_point(params, ctx)
        doc["params"] = {k: scalar_to_json(getattr(p, k))
                         for k in ("a", "b", "c", "d", "e", "f", "s")}
        if what == "cf":
            trace = eval_cf(MassonCF(p), args.depth, ctx, method)
            doc["value"] = scalar_to_json(trace.final)
            doc["depth"] = trace.depth
            doc["est_error"] = scalar_to_json(trace.est_error)
            doc["terminated_exactly"] = trace.terminated_exactly
        elif what == "pincherle":
            doc["value"] = scalar_to_json(pincherle_value(p))
        elif what == "theorem1":
            doc["value"] = scalar_to_json(theorem1_rhs(p))
        else:
            if args.N is None:
                raise ConfigError("corollary2 requires --N")
            doc["value"] = scalar_to_json(
                corollary2_rhs(p, which=args.which, N=args.N))
            doc["N"] = args.N
            doc["which"] = args.which
    else:
        p = _reduced_point(params, ctx)
        doc["params"] = {k: scalar_to_json(getattr(p, k))
                         for k in ("a", "b", "c", "d", "e")}
        if what == "corollary3":
            doc["value"] = scalar_to_json(corollary3_rhs(p))
            if args.N is not None:
                doc["bridge_value"] = scalar_to_json(corollary3_bridge(p, args.N))
                doc["N"] = args.N
        else:  # corollary3_cf: the infinite (c_n, d_n) fraction itself
            trace = eval_cf(Corollary3CF(p), args.depth, ctx, method)
            doc["value"] = scalar_to_json(trace.final)
            doc["depth"] = trace.depth
            doc["est_error"] = scalar_to_json(trace.est_error)
    print(json.dumps(doc, indent=2))
    return 0


def _emit(report: Report, args) -> None:
    text = report.to_csv() if args.format == "csv" else report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text)


def _cmd_check(args) -> int:
    params = _parse_params(args.params)
    ctx = _context(args, params)
    spec = CheckSpec(name=args.name, ctx=ctx, depth=args.depth,
                     seed=args.seed, count=args.count)
    report = run_check(spec)
    _emit(report, args)
    return 0 if report.passed else 1


def _cmd_sweep(args) -> int:
    params = _parse_params(args.params)
    ctx = _context(args, params)
    grid = [int(v) for v in args.values.split(",")]
    if len(grid) < 2:
        raise ConfigError("sweep needs at least two --values")
    results = []
    for setting in grid:
        if args.axis == "depth":
            c = ctx
            depth = setting
        else:
            c = ctx.with_precision(setting)
            depth = args.depth
        if args.target == "corollary3_cf":
            p = _reduced_point(params, c)
            value = eval_cf(Corollary3CF(p), depth, c).final
        elif args.target == "corollary3":
            p = _reduced_point(params, c)
            value = corollary3_rhs(p)
        elif args.target == "theorem1":
            p = _masson_point(params, c)
            value = theorem1_rhs(p)
        elif args.target == "pincherle":
            p = _masson_point(params, c)
            value = pincherle_value(p)
        else:
            p = _masson_point(params, c)
            value = eval_cf(MassonCF(p), depth, c).final
        results.append((setting, value))
    records = []
    for (s0, v0), (s1, v1) in zip(results, results[1:]):
        drift = abs(v1 - v0) / max(abs(v1), mpf(ctx.eps))
        records.append({
            "from": s0, "to": s1,
            "value_from": scalar_to_json(v0),
            "value_to": scalar_to_json(v1),
            "relative_drift": scalar_to_json(drift),
        })
    final_drift = abs(results[-1][1] - results[-2][1]) / max(
        abs(results[-1][1]), mpf(ctx.eps))
    doc = {
        "sweep": args.axis,
        "target": args.target,
        "values": grid,
        "steps": records,
        "stable": bool(final_drift <= mpf(ctx.identity_tol)),
    }
    print(json.dumps(doc, indent=2))
    return 0 if doc["stable"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcfrac",
        description="Continued fractions and closed forms for the "
                    "very-well-poised balanced 10-phi-9 family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one fraction/closed form")
    p_eval.add_argument("what", choices=EVAL_TARGETS)
    _add_common(p_eval)
    p_eval.add_argument("--method", default="forward_convergents",
                        choices=[m.value for m in CFMethod])
    p_eval.add_argument("--N", type=int, default=None,
                        help="termination index (corollary2/bridge)")
    p_eval.add_argument("--which", default="f",
                        help="terminating slot for corollary2 (b..f)")
    p_eval.set_defaults(fn=_cmd_eval)

    p_check = sub.add_parser("check", help="run a named verification suite")
    p_check.add_argument("name", choices=CHECK_NAMES)
    _add_common(p_check)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--count", type=int, default=20)
    p_check.add_argument("--format", default="json", choices=("json", "csv"))
    p_check.add_argument("--out", default=None, help="write report to a file")
    p_check.set_defaults(fn=_cmd_check)

    p_sweep = sub.add_parser("sweep", help="depth or precision scan")
    p_sweep.add_argument("axis", choices=("depth", "precision"))
    _add_common(p_sweep)
    p_sweep.add_argument("--target", default="cf",
                         choices=("cf", "pincherle", "theorem1",
                                  "corollary3", "corollary3_cf"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated grid, e.g. 25,50,100")
    p_sweep.set_defaults(fn=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, QSeriesError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
