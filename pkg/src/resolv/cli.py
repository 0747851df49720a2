"""Command-line front end; every command prints one JSON report on stdout.

Exit codes: 0 when every check in the command passed, 1 when a mathematical
check failed, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _threads():
    # Solvers are single-threaded; the cap is forwarded to numeric libraries.
    cap = os.environ.get("RESOLV_THREADS")
    if cap:
        if not cap.isdigit() or int(cap) < 1:
            raise UsageError("RESOLV_THREADS must be a positive integer")
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _params(items) -> dict:
    from .exactla import Q

    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            out[name.strip()] = Q(value.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad rational {value!r} for {name}") from None
    return out


def _load(args, n=None):
    """The presentation named by ``args.algebra`` (catalog key or DSL file) and the size used."""
    from . import catalog, dsl

    src = args.algebra
    if os.path.exists(src):
        return dsl.parse(Path(src).read_text(), t=args.t, n=n), n
    e = catalog.entry(src)
    if e.needs_n and n is None:
        n = max(e.min_n or 1, 5)
    return catalog.get(src, t=args.t, n=n if e.needs_n else None), n


def _bind(p, args, symbolic=False):
    from . import catalog
    from .presentation import bind_params, partial_bind

    given = _params(args.param)
    unknown = sorted(set(given) - set(p.param_names))
    if unknown:
        raise UsageError(f"unknown parameter(s) {', '.join(unknown)}; declared: {', '.join(p.param_names) or 'none'}")
    if symbolic:
        return (partial_bind(p, given) if given else p), given
    b = catalog.draw_bindings(p, random.Random(args.seed), fix=given, nonzero=True)
    return bind_params(p, b), b


def _truncated(args):
    from .quotient import truncate

    if args.n is None:
        raise UsageError(f"{args.command} needs -n N")
    p, _ = _load(args, args.n)
    q, b = _bind(p, args)
    return truncate(q, args.n), b


def _report(args, result, bindings=None, level=None) -> dict:
    from .exactla import qstr

    return {
        "command": args.command,
        "algebra": getattr(args, "algebra", None),
        "level": level,
        "bindings": {k: qstr(v) for k, v in sorted((bindings or {}).items())},
        "seed": args.seed,
        "result": result,
        "version": __version__,
    }


# --- commands ---------------------------------------------------------------------


def cmd_check(args):
    from .identities import check_identities

    p, n = _load(args, args.n)
    q, b = _bind(p, args, symbolic=True)
    v = check_identities(q)
    return _report(args, v.to_json(), b, n), v.proved


def cmd_series(args):
    from .tailspace import series

    p, n = _load(args, args.n)
    q, b = _bind(p, args)
    which = {"lc": "lower_central", "derived": "derived"}[args.which]
    s = series(q, which, args.depth)
    out = s.to_json()
    out["codims"] = s.codims()
    return _report(args, out, b, n), True


def cmd_residual(args):
    from .tailspace import residual_classify

    p, n = _load(args, args.n)
    q, b = _bind(p, args)
    return _report(args, residual_classify(q, args.depth), b, n), True


def cmd_truncate(args):
    T, b = _truncated(args)
    return _report(args, T.to_json(), b, args.n), True


def cmd_der(args):
    from .derivations import derivation_space

    T, b = _truncated(args)
    basis = derivation_space(T)
    return _report(args, {"der_dim": len(basis), "basis": [d.describe(T) for d in basis]}, b, args.n), True


def cmd_h1(args):
    from .derivations import inner_and_h1

    T, b = _truncated(args)
    return _report(args, inner_and_h1(T).to_json(T), b, args.n), True


def cmd_h2(args):
    from .cohomology import ALTERNATING, BILINEAR, h2_report

    T, b = _truncated(args)
    flavor = {None: None, "lie": ALTERNATING, "leibniz": BILINEAR}[args.flavor]
    if flavor == ALTERNATING and T.kind != "lie":
        raise UsageError("--flavor lie needs a Lie algebra")
    r = h2_report(T, flavor)
    out = r.to_json(T)
    out.update({"b_in_z": r.b_in_z, "h2_dim_by_extension": r.h2_dim_by_extension, "consistent": r.consistent})
    return _report(args, out, b, args.n), r.consistent


def cmd_complete(args):
    from .derivations import inner_and_h1
    from .quotient import center, subspace_names

    T, b = _truncated(args)
    z = center(T)
    h1 = inner_and_h1(T)
    out = {"center_dim": z.dim, "h1_dim": h1.h1_dim, "complete": z.dim == 0 and h1.h1_dim == 0}
    if z.dim:
        out["center"] = subspace_names(T, z)
    if h1.h1_dim:
        out["outer_coset_reps"] = [d.describe(T) for d in h1.outer_coset_reps]
    return _report(args, out, b, args.n), out["complete"]


def _scenario_path(name: str) -> Path:
    from .scenario import shipped

    if os.path.exists(name):
        return Path(name)
    for path in shipped():
        if path.stem == name:
            return path
    raise UsageError(f"no scenario file or shipped scenario named {name!r}")


def cmd_transform(args):
    from .scenario import load_scenario, run_scenario

    sc = load_scenario(_scenario_path(args.scenario))
    if args.n is not None:
        sc.level = args.n
    r = run_scenario(sc, args.seed)
    out = {k: v for k, v in r.items() if k not in ("level", "bindings")}
    args.algebra = sc.name
    return _report(args, out, {k: v for k, v in r["bindings"].items()}, r["level"]), r["ok"]


def cmd_scenarios(args):
    from .scenario import load_scenario, shipped

    out = []
    for path in shipped():
        sc = load_scenario(path)
        out.append({"name": sc.name or path.stem, "file": path.name, "description": sc.description})
    return _report(args, {"scenarios": out, "criteria": criteria_listing()}, None, None), True


def cmd_catalog(args):
    from . import catalog

    return _report(args, {"entries": catalog.listing()}, None, None), True


def cmd_accept(args):
    from .acceptance import TITLES, run

    if args.which == "all":
        ids = sorted(TITLES)
    else:
        try:
            ids = [int(x) for x in args.which.split(",")]
        except ValueError:
            raise UsageError("accept expects a criterion number, a comma list or 'all'") from None
        bad = [k for k in ids if k not in TITLES]
        if bad:
            raise UsageError(f"unknown criterion {bad[0]}; known: 1..{max(TITLES)}")
    runs = []
    for k in ids:
        r = run(k, args.seed)
        if not args.timing:
            r.pop("seconds")
        runs.append(r)
    out = {"criteria": runs, "passed": sum(r["ok"] for r in runs), "total": len(runs)}
    return _report(args, out, None, None), all(r["ok"] for r in runs)


def criteria_listing() -> list[dict]:
    from importlib.resources import files

    text = (files(__package__) / "scenarios" / "criteria.txt").read_text()
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            k, _, cmd = line.partition(":")
            out.append({"criterion": int(k), "command": cmd.strip()})
    return out


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resolv", description="Exact computations on rule-presented Lie and Leibniz algebras.")
    ap.add_argument("--version", action="version", version=f"resolv {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for random parameter draws")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    common.set_defaults(pretty=False)
    alg = argparse.ArgumentParser(add_help=False)
    alg.add_argument("algebra", help="catalog key or path to a DSL file")
    alg.add_argument("--param", action="append", metavar="NAME=VALUE", help="fix a parameter (repeatable)")
    alg.add_argument("--t", type=int, default=5, help="tail parameter length (default 5)")
    alg.add_argument("-n", type=int, default=None, help="truncation level")

    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common, alg], help="prove or refute the defining identities")
    s = sub.add_parser("series", parents=[common, alg], help="lower central or derived series")
    s.add_argument("--which", choices=("lc", "derived"), default="lc")
    s.add_argument("--depth", type=int, default=6)
    s = sub.add_parser("residual", parents=[common, alg], help="residual nilpotency and solvability")
    s.add_argument("--depth", type=int, default=8)
    sub.add_parser("truncate", parents=[common, alg], help="structure table of L/I_n")
    sub.add_parser("der", parents=[common, alg], help="derivation algebra of L/I_n")
    sub.add_parser("h1", parents=[common, alg], help="derivations modulo inner ones")
    s = sub.add_parser("h2", parents=[common, alg], help="second cohomology with adjoint coefficients")
    s.add_argument("--flavor", choices=("lie", "leibniz"), default=None)
    sub.add_parser("complete", parents=[common, alg], help="trivial center and no outer derivations")
    s = sub.add_parser("transform", parents=[common], help="replay a scenario of basis changes")
    s.add_argument("scenario", help="scenario file or shipped scenario name")
    s.add_argument("-n", type=int, default=None, help="override the scenario level")
    sub.add_parser("scenarios", parents=[common], help="list shipped scenarios and criterion commands")
    s = sub.add_parser("catalog", parents=[common], help="catalog commands")
    s.add_argument("action", choices=("list",))
    s = sub.add_parser("accept", parents=[common], help="run acceptance criteria")
    s.add_argument("which", help="criterion number, comma list, or 'all'")
    s.add_argument("--timing", action="store_true", help="include wall-clock seconds (not reproducible)")
    return ap


COMMANDS = {
    "check": cmd_check,
    "series": cmd_series,
    "residual": cmd_residual,
    "truncate": cmd_truncate,
    "der": cmd_der,
    "h1": cmd_h1,
    "h2": cmd_h2,
    "complete": cmd_complete,
    "transform": cmd_transform,
    "scenarios": cmd_scenarios,
    "catalog": cmd_catalog,
    "accept": cmd_accept,
}


def _dump(obj, pretty: bool) -> str:
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2, default=str)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def main(argv=None) -> int:
    from .catalog import UnknownKey
    from .presentation import PresentationError

    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _threads()
        report, ok = COMMANDS[args.command](args)
    except (UsageError, PresentationError, UnknownKey, FileNotFoundError) as e:
        msg = e.args[0] if isinstance(e, UnknownKey) and e.args else str(e)
        print(_dump({"command": args.command, "error": type(e).__name__, "message": str(msg), "version": __version__}, args.pretty))
        return EXIT_USAGE
    print(_dump(report, args.pretty))
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
