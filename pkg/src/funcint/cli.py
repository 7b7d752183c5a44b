"""Command-line front end: funcint eval|verify|moments|pairings|carleman."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import kernelalg, oracle, wick
from .engine import CATALOG, canonicalize, evaluate, instantiate_closed_form
from .errors import CapExceeded, DSLSyntaxError, FuncIntError, OddOrder
from .oracle import VerificationCase, encode_number, run_case

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MATH = 0, 1, 2, 3
CARLEMAN_CAP = 10**7
CARLEMAN_ROWS = 10

DEFAULTS = {
    "format": "text",
    "tol": 1e-8,
    "dims": "1,2,4",
    "mc_samples": 0,
    "seed": 42,
    "out": None,
    "bind": [],
    "kind": [],
}


class UsageError(Exception):
    pass


def _common_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    p.add_argument("--format", choices=("text", "json"), default=S, help="output format (default text)")
    p.add_argument("--tol", type=float, default=S, help="relative tolerance (default 1e-8)")
    p.add_argument("--dims", default=S, help="comma-separated dimensions (default 1,2,4)")
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=S, help="Monte Carlo samples, 0 = off")
    p.add_argument("--seed", type=int, default=S, help="random seed (default 42; FUNCINT_SEED overrides)")
    p.add_argument("--out", default=S, help="write output to this file")
    p.add_argument("--bind", action="append", default=S, metavar="NAME=PATH", help="bind a kernel or vector file")
    p.add_argument("--kind", action="append", default=S, metavar="NAME=KIND", help="declare a kernel kind")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="funcint", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="closed form of a DSL integral")
    p.add_argument("dsl", help='e.g. "int exp(-q.q) D[q]"')
    p.add_argument("--dim", type=int, help="instantiate numerically at this dimension")

    p = sub.add_parser("verify", parents=[common], help="engine against the finite-dimensional oracle")
    p.add_argument("--case", required=True, help="A..J, all, or a file holding a DSL integral")

    p = sub.add_parser("moments", parents=[common], help="moment tensor of the measure")
    p.add_argument("--order", type=int, required=True)

    p = sub.add_parser("pairings", parents=[common], help="count or list Wick pairings")
    p.add_argument("--n", type=int, required=True, help="number of items (even)")
    p.add_argument("--list", action="store_true", help="enumerate the pairings")

    p = sub.add_parser("carleman", parents=[common], help="Carleman condition diagnostics")
    p.add_argument("--norm", type=float, required=True, help="||f||")
    p.add_argument("--nmax", type=int, required=True)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    for k, v in DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    env = os.environ.get("FUNCINT_SEED")
    if env:
        try:
            args.seed = int(env)
        except ValueError:
            raise UsageError(f"FUNCINT_SEED must be an integer, got {env!r}") from None
    try:
        args.dims = tuple(int(x) for x in str(args.dims).split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--dims must be comma-separated integers, got {args.dims!r}") from None
    if not args.dims or min(args.dims) < 1:
        raise UsageError("--dims needs positive integers")
    return args


def _pairs(items, flag) -> dict:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name or not value:
            raise UsageError(f"{flag} expects NAME=VALUE, got {item!r}")
        out[name] = value
    return out


def load_bindings(specs) -> dict:
    out = {}
    grid = None
    for name, path in _pairs(specs, "--bind").items():
        try:
            obj = kernelalg.load(path, grid)
        except OSError as exc:
            raise UsageError(f"cannot read binding {name}: {exc}") from None
        grid = grid or obj.grid
        out[name] = obj
    return out


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def cmd_eval(args) -> int:
    try:
        qf = canonicalize(args.dsl, _pairs(args.kind, "--kind"))
        cf = evaluate(qf)
    except DSLSyntaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = cf.to_dict()
    if args.dim is not None:
        value = instantiate_closed_form(cf, load_bindings(args.bind), args.dim)
        report["dim"] = args.dim
        report["value"] = encode_number(value)
    if args.format == "json":
        _emit(args, _json(report))
        return EXIT_OK
    lines = [report["closed_form"]]
    lines.append("assumptions: " + (", ".join(report["assumptions"]) or "none"))
    lines.append("residual tags: " + (", ".join(report["residual_tags"]) or "none"))
    if "value" in report:
        lines.append(f"value (D={args.dim}): {report['value']!r}")
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _cases(selector: str, args) -> list:
    kw = dict(dims=args.dims, tol=args.tol, mc_samples=args.mc_samples, seed=args.seed)
    bindings = load_bindings(args.bind) if args.bind else None
    if bindings:
        grid = next(iter(bindings.values())).grid
        kw["dims"] = (grid.dim,)
    kinds = _pairs(args.kind, "--kind")
    if selector.lower() == "all":
        return [VerificationCase.builtin(n, **kw) for n in CATALOG]
    if selector.upper() in CATALOG:
        return [VerificationCase.builtin(selector, bindings=bindings, kinds=kinds, **kw)]
    path = Path(selector)
    if not path.is_file():
        raise UsageError(f"unknown case {selector!r}; choose one of {', '.join(CATALOG)}, all, or a file")
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        kinds = {**data.get("kinds", {}), **kinds}
        return [VerificationCase(data.get("name", path.stem), data["dsl"], bindings=bindings, kinds=kinds, **kw)]
    return [VerificationCase(path.stem, text.strip(), bindings=bindings, kinds=kinds, **kw)]


def _report_text(r) -> str:
    lines = [f"case {r.case}: {r.dsl}", f"  closed form: {r.closed_form}"]
    lines.append("  assumptions: " + (", ".join(r.assumptions) or "none"))
    for row in r.rows:
        if row["error"]:
            lines.append(f"  D={row['dim']}: FAIL {row['error']}")
            continue
        status = "pass" if row["pass"] else "FAIL"
        text = f"  D={row['dim']}: {status} engine={row['engine']!r} analytic={row['analytic']!r} rel_err={row['rel_err']!r}"
        if row["mc"] is not None:
            text += f" mc={row['mc']!r} mc_stderr={row['mc_stderr']!r}"
        lines.append(text)
    return "\n".join(lines)


def cmd_verify(args) -> int:
    reports = [run_case(vc) for vc in _cases(args.case, args)]
    if args.format == "json":
        payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
        _emit(args, _json(payload))
    else:
        c = reports[0].config
        header = f"seed={c['seed']} samples={c['samples']} tol={c['tol']!r} generator={c['generator_id']}"
        _emit(args, "\n".join([header, f"measure: {c['measure_convention']}"] + [_report_text(r) for r in reports]))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_moments(args) -> int:
    m = wick.measure_moment(args.order)
    report = {
        "order": m.order,
        "prefactor": m.prefactor.render() if not m.is_zero() else "0",
        "count": len(m.terms),
        "terms": m.render_terms(),
    }
    if args.format == "json":
        _emit(args, _json(report))
    elif m.is_zero():
        _emit(args, f"M_{m.order} = 0 (odd order)")
    else:
        lines = [f"M_{m.order} = {report['prefactor']} * [sum of {report['count']} terms]"]
        lines += [f"  {t}" for t in report["terms"]]
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_pairings(args) -> int:
    count = wick.count_pairings(args.n)
    report = {"n": args.n, "count": count}
    if args.list:
        report["pairings"] = [p.render() for p in wick.enumerate_pairings(args.n)]
    if args.format == "json":
        _emit(args, _json(report))
    else:
        _emit(args, "\n".join([str(count)] + report.get("pairings", [])))
    return EXIT_OK


def _carleman_rows(n_max: int) -> list:
    rows = list(range(1, min(n_max, CARLEMAN_ROWS) + 1))
    p = 100
    while p <= n_max:
        rows.append(p)
        p *= 10
    if rows[-1] != n_max:
        rows.append(n_max)
    return rows


def cmd_carleman(args) -> int:
    if args.nmax > CARLEMAN_CAP:
        raise CapExceeded(f"--nmax {args.nmax} exceeds the cap {CARLEMAN_CAP}")
    if args.norm <= 0 or args.nmax < 1:
        raise UsageError("--norm must be positive and --nmax at least 1")
    rep = wick.carleman_check(args.norm, args.nmax)
    table = [
        {"n": n, "term": float(rep.terms[n - 1]), "lower_bound": float(rep.lower_bounds[n - 1])}
        for n in _carleman_rows(args.nmax)
    ]
    report = {**rep.summary(), "table": table}
    if args.format == "json":
        _emit(args, _json(report))
        return EXIT_OK
    lines = [f"{'n':>10} {'term':>22} {'lower_bound':>22}"]
    lines += [f"{r['n']:>10} {r['term']!r:>22} {r['lower_bound']!r:>22}" for r in table]
    lines.append(f"partial_sum={report['partial_sum']!r} bound_sum={report['bound_sum']!r}")
    lines.append(f"termwise_ok={'true' if report['termwise_ok'] else 'false'}")
    _emit(args, "\n".join(lines))
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "verify": cmd_verify,
    "moments": cmd_moments,
    "pairings": cmd_pairings,
    "carleman": cmd_carleman,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CapExceeded, OddOrder) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FuncIntError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
