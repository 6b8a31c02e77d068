"""Command-line entry point: ``bvcheck verify | lattice | expr``.

Exit codes: 0 everything selected passed, 1 a suite failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BVError, ConfigError, MixedGrade
from .verify import all_pass, load_config, make_config, run_all, suite_ids

LATTICE_SUITES = ("lattice_green", "lattice_rop", "lattice_retvar")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="JSON config file (flags override it)")
    p.add_argument("--theory", choices=("ym", "scalar"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out", metavar="PATH", help="where to write the JSON report")
    p.add_argument("--mutation", metavar="NAME", help="apply a registered negative-control mutation")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvcheck", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run identity suites")
    _common(v)
    v.add_argument("--suite", action="append", metavar="ID", help="suite to run (repeatable)")
    v.add_argument("--all", action="store_true", help="run every registered suite")
    v.add_argument("--algebra", choices=("both", "su2", "abstract"))

    lt = sub.add_parser("lattice", help="run the lattice suites")
    _common(lt)
    lt.add_argument("--refine", type=int, metavar="K", help="refinement factor of the grid pair")
    lt.add_argument("--dump", nargs="?", const="lattice_dump", metavar="DIR",
                    help="write plain-text field matrices (default directory lattice_dump)")

    ex = sub.add_parser("expr", help="normalize an s-expression and print its grading")
    ex.add_argument("text", help="expression, or - to read standard input")
    ex.add_argument("--algebra", choices=("abstract", "su2"), default="abstract")
    return ap


def _config(args) -> dict:
    over = load_config(args.config) if args.config else {}
    if not isinstance(over, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("theory", "seed", "mutation", "out", "algebra"):
        val = getattr(args, key, None)
        if val is not None:
            over["output" if key == "out" else key] = val
    lat = dict(over.get("lattice", {}))
    if getattr(args, "refine", None) is not None:
        lat["refine"] = args.refine
    if lat:
        over["lattice"] = lat
    if getattr(args, "dump", None):
        over["dump"] = args.dump
    return make_config(over)


def _emit(reports, cfg, out=None) -> int:
    out = out or sys.stdout
    for r in reports:
        line = f"{r.status.upper():7s} {r.suite}"
        if r.status == "fail":
            line += f"  residual: {str(r.residual)[:300]}"
        elif r.details and r.suite.startswith("lattice"):
            orders = {k: v for k, v in r.details.items() if k.endswith("order")}
            line += "  " + " ".join(f"{k}={v}" for k, v in orders.items())
        print(line, file=out)
    path = Path(cfg["output"])
    path.write_text(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    failed = [r.suite for r in reports if r.status == "fail"]
    if failed:
        print("failing suites: " + ", ".join(failed), file=out)
        return 1
    return 0 if all_pass(reports) else 1


def cmd_verify(cfg: dict, suites=None, run_every: bool = False) -> int:
    if not run_every and not suites:
        raise ConfigError("give --suite ID (repeatable) or --all")
    chosen = None if run_every else suites
    reports = run_all(cfg["theory"], cfg, chosen)
    return _emit(reports, cfg)


def cmd_lattice(cfg: dict) -> int:
    reports = run_all(cfg["theory"], cfg, LATTICE_SUITES)
    return _emit(reports, cfg)


def cmd_expr(text: str, algebra: str = "abstract", out=None) -> int:
    out = out or sys.stdout
    from .expr import grade_of, normalize, parse, to_text

    e = normalize(parse(text), algebra)
    print(to_text(e), file=out)
    try:
        g = grade_of(e)
        print("grading: " + " ".join(f"{k}={v}" for k, v in g.as_dict().items()), file=out)
    except MixedGrade as exc:
        print(f"grading: none ({exc})", file=out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "expr":
            text = sys.stdin.read() if args.text == "-" else args.text
            return cmd_expr(text, args.algebra)
        cfg = _config(args)
        if args.command == "verify":
            if args.suite:
                known = set(suite_ids())
                for s in args.suite:
                    if s not in known:
                        from .errors import UnknownSuite

                        raise UnknownSuite(f"no suite named {s!r}")
            return cmd_verify(cfg, args.suite, args.all)
        return cmd_lattice(cfg)
    except BVError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: IOError: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
