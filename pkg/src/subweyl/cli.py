"""Command-line entry point: ``subweyl <command> [options]``.

Exit codes: 0 success, 1 certified but above the threshold, 2 bad input
(inadmissible parameters or a malformed file), 3 precision exhausted,
4 a lemma or oracle check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from decimal import Decimal
from pathlib import Path

import numpy as np

from . import __version__
from .crossover import COMPARATORS, crossover_constant, crossover_scheme
from .errors import (AdmissibilityError, NoAdmissiblePoint, NoCrossover, PrecisionExhausted,
                     SchemeValidationError)
from .pipeline import Conventions, _dec, assemble
from .rigor import DEFAULT_PRECISION, MIN_PRECISION, default_precision

log = logging.getLogger("subweyl")

EXIT_OK, EXIT_ABOVE, EXIT_INPUT, EXIT_PRECISION, EXIT_CHECK = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _sha256(data):
    return hashlib.sha256(data).hexdigest()


def _file_hash(path):
    return _sha256(Path(path).read_bytes())


def _conventions(args):
    return Conventions(h3_convention=args.h3_convention, h0_convention=args.h0_convention,
                       variant=args.variant)


def _report(kind, payload, args, input_hash=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out") and v is not None}
    blob = json.dumps({"input": input_hash, "config": config}, sort_keys=True, default=str).encode()
    return {
        "kind": kind,
        "payload": payload,
        "provenance": {"input_sha256": input_hash, "config": config, "config_sha256": _sha256(blob),
                       "tool_version": __version__},
    }


def _emit(doc, args):
    text = json.dumps(doc, indent=2, default=str) + "\n"
    _write(text, args)


def _write(text, args):
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _tagged(value, direction="NEAREST", **more):
    d = {"value": str(value), "direction": direction}
    d.update(more)
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_certify(args):
    from .schemefile import read_params

    params = read_params(args.params)
    if args.t0 is not None or args.t1 is not None:
        params = params.with_interval(args.t0 if args.t0 is not None else params.log_t0,
                                      args.t1 if args.t1 is not None else params.log_t1)
    for item in args.set or ():
        name, _, value = item.partition("=")
        if name not in params.to_dict() or not value:
            raise InputError(f"--set expects NAME=VALUE with NAME a parameter, got {item!r}")
        params = params.__class__.from_dict(dict(params.to_dict(), **{name: value}))
    rep = assemble(params, _conventions(args), args.precision)
    threshold = Decimal(args.threshold)
    ok = rep.A_total <= threshold
    if args.format == "json":
        payload = rep.to_json()
        payload["threshold"] = _tagged(threshold, "EXACT")
        payload["within_threshold"] = bool(ok)
        _emit(_report("certify", payload, args, _file_hash(args.params)), args)
    else:
        lines = rep.summary_lines()
        lines.append(f"{'threshold':<20}{threshold}")
        lines.append("PASS: A_total <= threshold" if ok else "FAIL: A_total exceeds threshold")
        _write("\n".join(lines) + "\n", args)
    return EXIT_OK if ok else EXIT_ABOVE


def cmd_table(args):
    from .schemefile import a_string, read_scheme

    scheme, doc = read_scheme(args.params)
    conv = _conventions(args)
    rows, worst = [], None
    for i, row in enumerate(scheme.rows):
        rep = assemble(row.params, conv, args.precision)
        printed = row.A.value
        reproduces = rep.A_total.value <= printed
        rows.append({"row": i, "log_t0": str(row.log_t0), "log_t1": doc["rows"][i]["log_t1"],
                     "A": rep.A_total.to_json(), "A_printed": _tagged(a_string(row.A), "UP"),
                     "reproduces_printed": reproduces})
        if worst is None or rep.A_total.value > worst.value:
            worst = rep.A_total
    ok = worst <= Decimal(args.threshold)
    payload = {"rows": rows, "global_A": worst.to_json(), "global_A_printed": _tagged(a_string(worst), "UP"),
               "threshold": _tagged(args.threshold, "EXACT"), "within_threshold": bool(ok)}
    if args.format == "json":
        _emit(_report("table", payload, args, _file_hash(args.params)), args)
    else:
        out = [f"{'row':>4} {'log t0':>10} {'log t1':>10} {'A (UP)':>14}  printed"]
        for r in rows:
            out.append(f"{r['row']:>4} {r['log_t0']:>10} {r['log_t1']:>10} {r['A']['value'][:14]:>14}  "
                       f"{r['A_printed']['value']}{'' if r['reproduces_printed'] else '  (MISMATCH)'}")
        out.append(f"global A (UP) = {a_string(worst)}")
        _write("\n".join(out) + "\n", args)
    if not all(r["reproduces_printed"] for r in rows):
        return EXIT_INPUT
    return EXIT_OK if ok else EXIT_ABOVE


def cmd_optimize(args):
    from .optimizer import SearchConfig, build_scheme, optimize_interval
    from .schemefile import a_string, dumps, scheme_to_dict

    config = SearchConfig(budget=args.budget, seed=args.seed, restarts=args.restarts,
                          conventions=_conventions(args), precision=args.precision,
                          auto_tolerance=args.auto_tolerance, max_total_evals=args.max_evals)
    if args.t0 is None:
        raise InputError("optimize needs --t0")
    if args.t1 is not None and not _dec(args.t1).is_infinite():
        res = optimize_interval(args.t0, args.t1, config)
        payload = {"params": res.params.to_dict(), "A": res.A.to_json(), "A_printed": _tagged(a_string(res.A), "UP"),
                   "evaluations": res.evaluations}
        _emit(_report("optimize", payload, args), args)
        return EXIT_OK
    if args.breakpoints:
        bps = [Decimal(b) for b in args.breakpoints.split(",") if b.strip()]
    elif args.t1 is not None:
        bps = []
    else:
        bps = "AUTO"
    progress = (lambda m: log.info(m)) if args.verbose else None
    scheme = build_scheme(args.t0, bps, config, log=progress)
    meta = {"seed": args.seed, "budget": args.budget, "precision": args.precision or default_precision(),
            "h3_convention": args.h3_convention, "h0_convention": args.h0_convention, "variant": args.variant,
            "tool_version": __version__}
    _write(dumps(scheme_to_dict(scheme, meta)), args)
    log.info("global A (UP) = %s over %d rows, %d evaluations", a_string(scheme.global_A), len(scheme.rows),
             scheme.meta["evaluations"])
    return EXIT_OK


def cmd_crossover(args):
    against = tuple(a for item in args.against for a in item.split(","))
    prec = args.precision or DEFAULT_PRECISION
    h = None
    if args.constant is not None:
        value = crossover_constant(args.constant, against if len(against) > 1 else against[0], prec)
    elif args.params:
        from .schemefile import read_scheme

        scheme, _ = read_scheme(args.params)
        h = _file_hash(args.params)
        value = crossover_scheme(scheme, against, prec)
    else:
        raise InputError("crossover needs --constant or --params")
    payload = {"against": list(against), "log_t": _tagged(f"{value:.6f}", "UP", tolerance="1e-3")}
    if args.format == "json":
        _emit(_report("crossover", payload, args, h), args)
    else:
        _write(f"crossover at log t = {value:.3f}  (t = exp({value:.3f}))\n", args)
    return EXIT_OK


def cmd_verify_lemmas(args):
    from .lab import LEMMAS, run_suite

    lemmas = tuple(args.lemmas.split(",")) if args.lemmas else LEMMAS
    bad = [x for x in lemmas if x not in LEMMAS]
    if bad:
        raise InputError(f"unknown lemma(s) {bad}; choose from {', '.join(LEMMAS)}")
    results = run_suite(args.trials, args.seed, lemmas)
    flat = [r for lemma in lemmas for r in results[lemma]]
    failures = [r for r in flat if not r.passed]
    summary = {lemma: {"trials": len(results[lemma]), "failures": sum(not r.passed for r in results[lemma]),
                       "min_margin": _tagged(min(r.margin for r in results[lemma]))}
               for lemma in lemmas}
    payload = {"seed": args.seed, "trials": args.trials, "summary": summary,
               "results": [_lemma_json(r) for r in flat]}
    _emit(_report("lemma-check", payload, args), args)
    if failures:
        for r in failures:
            sys.stderr.write(f"FAILED {r.lemma}: replay with seed {r.config['trial_seed']}\n")
        return EXIT_CHECK
    return EXIT_OK


def _lemma_json(r):
    return {"lemma": r.lemma, "lhs": _tagged(repr(r.lhs)), "rhs": _tagged(repr(r.rhs)),
            "margin": _tagged(repr(r.margin)), "eps": _tagged(repr(r.eps), "UP"), "pass": r.passed,
            "config": r.config, "extra": {k: _tagged(repr(v)) for k, v in r.extra.items()}}


def zeta_grid(points=50, lo=200.0, hi=1e8):
    return [float(x) for x in np.geomspace(lo, hi, points)]


def cmd_zeta_check(args):
    from .zeta import ORACLE_TOL, rs_upper, zeta_oracle

    rows, failures = [], 0
    for t in zeta_grid(args.points, args.t_min, args.t_max):
        z = float(zeta_oracle(t))
        up = rs_upper(t)
        vdc = 0.618 * t ** (1 / 6) * math.log(t)
        tol = float(ORACLE_TOL)
        ok = up >= z - tol and z - tol <= vdc
        failures += not ok
        rows.append({"t": _tagged(repr(t), "EXACT"), "zeta_oracle": _tagged(repr(z), "NEAREST", tolerance=str(tol)),
                     "rs_upper": _tagged(repr(up), "UP"), "vdc_0618": _tagged(repr(vdc)), "pass": ok})
    _emit(_report("zeta-check", {"points": rows, "failures": failures}, args), args)
    return EXIT_CHECK if failures else EXIT_OK


def cmd_export(args):
    from .schemefile import plot_csv, read_scheme, scheme_csv

    scheme, doc = read_scheme(args.params)
    if args.format == "json":
        _write(json.dumps(doc, indent=2) + "\n", args)
    elif args.plot_data:
        _write(plot_csv(scheme), args)
    else:
        _write(scheme_csv(doc), args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _precision(s):
    p = int(s)
    if p < MIN_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be >= {MIN_PRECISION}")
    return p


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=_precision, default=None,
                        help="working digits (default: $ZETA_CERTIFY_PRECISION or 60)")
    common.add_argument("--h3-convention", choices=("proof", "statement"), default="proof")
    common.add_argument("--h0-convention", choices=("theta1", "theta2"), default="theta1")
    common.add_argument("--variant", choices=("verbatim", "repaired"), default="verbatim")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="subweyl", description="Certified constants for |zeta(1/2+it)| <= A t^(27/164).")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", parents=[common], help="certify one parameter row")
    c.add_argument("--params", required=True)
    c.add_argument("--threshold", default="66.7")
    c.add_argument("--t0", help="override log t0")
    c.add_argument("--t1", help="override log t1 ('inf' for the tail)")
    c.add_argument("--set", action="append", metavar="NAME=VALUE", help="override one parameter")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_certify)

    t = sub.add_parser("table", parents=[common], help="re-certify every row of a scheme file")
    t.add_argument("--params", required=True)
    t.add_argument("--threshold", default="66.7")
    t.add_argument("--format", choices=("text", "json"), default="text")
    t.set_defaults(func=cmd_table)

    o = sub.add_parser("optimize", parents=[common], help="search parameters for an interval or a scheme")
    o.add_argument("--t0", help="log of the first height")
    o.add_argument("--t1", help="log of the end height; 'inf' or omitted for a scheme")
    o.add_argument("--breakpoints", help="comma-separated log heights (default: AUTO)")
    o.add_argument("--budget", type=int, default=6000, help="evaluations per interval")
    o.add_argument("--max-evals", type=int, default=10**6, help="cap on evaluations for the whole scheme")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--restarts", type=int, default=1)
    o.add_argument("--auto-tolerance", type=float, default=0.01)
    o.set_defaults(func=cmd_optimize)

    x = sub.add_parser("crossover", parents=[common], help="where the bound beats a comparator")
    x.add_argument("--against", action="append", default=None,
                   help=f"comparator(s): {', '.join(COMPARATORS)}; repeat or comma-separate")
    x.add_argument("--constant", help="a constant A instead of a scheme")
    x.add_argument("--params", help="scheme file")
    x.add_argument("--format", choices=("text", "json"), default="text")
    x.set_defaults(func=cmd_crossover)

    v = sub.add_parser("verify-lemmas", parents=[common], help="randomized inequality checks")
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--lemmas", help="comma-separated subset")
    v.set_defaults(func=cmd_verify_lemmas)

    z = sub.add_parser("zeta-check", parents=[common], help="oracle vs Riemann-Siegel majorant")
    z.add_argument("--points", type=int, default=50)
    z.add_argument("--t-min", type=float, default=200.0)
    z.add_argument("--t-max", type=float, default=1e8)
    z.set_defaults(func=cmd_zeta_check)

    e = sub.add_parser("export", parents=[common], help="CSV / plot data from a scheme file")
    e.add_argument("--params", required=True)
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.add_argument("--plot-data", action="store_true", help="emit log t vs log bounds instead")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if getattr(args, "against", "") is None:
        args.against = ["vdc_0618"]
    try:
        return args.func(args)
    except NoCrossover as exc:
        sys.stderr.write(f"no crossover: {exc}\n")
        return EXIT_ABOVE
    except AdmissibilityError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (SchemeValidationError, InputError, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except PrecisionExhausted as exc:
        sys.stderr.write(f"error: precision exhausted: {exc}\n")
        return EXIT_PRECISION
    except NoAdmissiblePoint as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
