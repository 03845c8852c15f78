"""Command-line front end: ``qpalg parse|run|explore FILE``.

Exit codes: 0 success, 1 parse or validation error, 2 I/O error,
3 deadlock, 4 fuel exhausted, 5 partial tree (``--max-paths`` reached).
"""
from __future__ import annotations

import argparse
import os
import sys
import time

from . import report
from .explorer import DEFAULT_FUEL, DEFAULT_MAX_PATHS, Sampler, distribution, explore
from .semantics import Engine, initial_state
from .syntax import ParseError, parse_program, print_program

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_IO = 2
EXIT_DEADLOCK = 3
EXIT_FUEL = 4
EXIT_PARTIAL = 5


def _read(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        print(f"{path}: cannot read: {e.strerror or e}", file=sys.stderr)
        return None


def _load(path: str):
    """``(program, exit code)``; the program is None on failure."""
    text = _read(path)
    if text is None:
        return None, EXIT_IO
    try:
        return parse_program(text), EXIT_OK
    except ParseError as e:
        print(e.diagnostic.located(path), file=sys.stderr)
        return None, EXIT_PARSE


def _observe(arg: str | None) -> tuple:
    if not arg:
        return ()
    return tuple(x.strip() for x in arg.split(",") if x.strip())


def _report(path, mode, params, key, body, diagnostics, t0) -> dict:
    return {
        "program": os.path.basename(path),
        "mode": mode,
        "params": params,
        key: body,
        "diagnostics": [d.to_json() for d in diagnostics],
        "time_ms": round((time.perf_counter() - t0) * 1000, 3),
    }


def _emit_diagnostics(path, diagnostics):
    seen = set()
    for d in diagnostics:
        if d not in seen:
            seen.add(d)
            print(d.located(path), file=sys.stderr)


def cmd_parse(args) -> int:
    prog, code = _load(args.file)
    if prog is None:
        return code
    sys.stdout.write(print_program(prog))
    return EXIT_OK


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    prog, code = _load(args.file)
    if prog is None:
        return code
    observe = _observe(args.observe)
    sampler = Sampler(prog, args.seed, cache=False)
    result, record = sampler.run(initial_state(prog), args.fuel, observe)
    params = {"seed": args.seed, "fuel": args.fuel, "observe": list(observe)}
    body = report.run_json(result, observe, record)
    out = _report(args.file, "run", params, "trace", body, result.diagnostics, t0)
    print(report.dumps(out))
    _emit_diagnostics(args.file, result.diagnostics)
    return {"terminal": EXIT_OK, "deadlock": EXIT_DEADLOCK}.get(result.status, EXIT_FUEL)


def cmd_explore(args) -> int:
    t0 = time.perf_counter()
    prog, code = _load(args.file)
    if prog is None:
        return code
    observe = _observe(args.observe)
    engine = Engine(prog)
    tree = explore(initial_state(prog), fuel=args.fuel, max_paths=args.max_paths, observe=observe, engine=engine)
    diags = []
    for n in tree.nodes:
        diags.extend(n.diagnostics)
    if args.format == "dot":
        sys.stdout.write(report.to_dot(tree))
    else:
        dist = distribution(tree)
        params = {
            "fuel": args.fuel,
            "max_paths": args.max_paths,
            "observe": list(observe),
        }
        body = report.distribution_json(tree, dist)
        out = _report(args.file, "explore", params, "distribution", body, diags, t0)
        print(report.dumps(out))
    _emit_diagnostics(args.file, diags)
    return EXIT_PARTIAL if tree.partial else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpalg", description="Run and explore QPAlg programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse, validate and pretty-print a program")
    p.add_argument("file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("run", help="one sampled execution, reported as JSON")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--observe", help="comma-separated observations (x, !gate, x&y)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explore", help="exhaustive execution tree")
    p.add_argument("file")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--max-paths", type=int, default=DEFAULT_MAX_PATHS)
    p.add_argument("--observe", help="comma-separated observations (x, !gate, x&y)")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_explore)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "fuel", 1) < 1:
        print("--fuel must be at least 1", file=sys.stderr)
        return EXIT_PARSE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
