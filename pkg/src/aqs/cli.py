"""Command line entry point: ``python -m aqs <command> [options]``."""
from __future__ import annotations

import argparse
import sys

from .report import (BUILTINS, COMMANDS, EXIT_SPEC, ReportOptions, SpecError, parse_spec,
                     render, run_report, spec_from_obj)


def _builtin_obj(args) -> dict:
    params = {}
    if args.builtin == "disc_bundle":
        if args.c is not None:
            params["c"] = args.c
    elif args.builtin == "flat_disco":
        if args.n is not None:
            params["n"] = args.n
        if args.p is not None:
            params["p"] = args.p
    elif args.weights is not None:
        params["weights"] = [w.strip() for w in args.weights.split(",") if w.strip()]
    return {"kind": "patch_builtin", "builtin": args.builtin, "params": params,
            "points": args.points, "seed": args.seed}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aqs", description="Classify and analyse almost contact metric structures.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="JSON manifold spec file, '-' for stdin")
    src.add_argument("--builtin", choices=BUILTINS)
    p.add_argument("--weights", help="comma-separated weights for heisenberg, e.g. 1,2")
    p.add_argument("--c", help="holomorphic curvature for disc_bundle, e.g. -4")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--points", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", help="output file (default stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.spec is not None:
            text = sys.stdin.read() if args.spec == "-" else open(args.spec, encoding="utf-8").read()
            spec = parse_spec(text)
        else:
            spec = spec_from_obj(_builtin_obj(args))
    except (SpecError, OSError) as exc:
        print(f"aqs: spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    report = run_report(spec, ReportOptions(args.command, args.tol, args.seed))
    text = render(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report["summary"]["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
