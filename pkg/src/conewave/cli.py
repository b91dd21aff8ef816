"""Command line: ``conewave run | oracle | sweep | report | scenarios | schema``.

Exit codes: 0 when every check passes, 1 when a check fails or a stage
errors at run time, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys

from . import __version__
from .errors import ParameterError
from .harness import runner
from .harness.scenario import BUILTINS, ScenarioError, builtin_names, schema_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def thread_limit():
    """Context capping BLAS/OpenMP pools at ``CONEWAVE_THREADS`` (no-op when unset)."""
    value = os.environ.get("CONEWAVE_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
        if n < 1:
            raise ValueError
    except ValueError:
        raise ScenarioError(f"CONEWAVE_THREADS must be a positive integer, got {value!r}") from None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def _print_checks(result) -> None:
    for c in result.checks:
        val = c.metrics.get(c.primary)
        shown = f"{val:.4g}" if isinstance(val, float) else val
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<16} {c.primary} = {shown}")
    if result.bundle is not None:
        print(f"bundle: {result.bundle}")


def cmd_run(args) -> int:
    result = runner.run(args.scenario, args.out)
    _print_checks(result)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    result = runner.oracle_check(args.scenario, args.oracle, args.tol, r_max=args.r_max, out_dir=args.out)
    _print_checks(result)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ScenarioError("--values needs at least one value")
    result = runner.sweep(args.template, args.axis, values, args.out)
    for row in result.table:
        print(f"{args.axis} = {row['axis_value']:.6g}: {'PASS' if row['passed'] else 'FAIL'}")
    for key, fit in sorted(result.fits.items()):
        if key.endswith(".passed"):
            continue
        print(f"  {key}: trend {fit['trend']}, extrapolated to 0: {fit['at_zero']:.4g}")
    if result.bundle is not None:
        print(f"bundle: {result.bundle}")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_report(args) -> int:
    rep = runner.report(args.bundle)
    print(json.dumps(rep.summary, indent=2, sort_keys=True))
    if rep.mismatched:
        print("hash mismatch: " + ", ".join(rep.mismatched), file=sys.stderr)
    print(f"{rep.kind} {'PASS' if rep.passed else 'FAIL'}, manifest {'ok' if rep.hashes_ok else 'BROKEN'}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_scenarios(args) -> int:
    if args.dump:
        if args.dump not in BUILTINS:
            raise ScenarioError(f"no built-in scenario {args.dump!r}")
        print(json.dumps(BUILTINS[args.dump], indent=2))
        return EXIT_OK
    for name in builtin_names():
        print(f"{name:<20} {BUILTINS[name].get('description', '')}")
    return EXIT_OK


def cmd_schema(args) -> int:
    sys.stdout.write(schema_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conewave", description="Wave propagation experiments on product cones.")
    p.add_argument("--version", action="version", version=f"conewave {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or built-in scenario into a bundle")
    r.add_argument("scenario", help="path to a scenario JSON file, or a built-in name")
    r.add_argument("--out", help="bundle directory (default: the scenario's 'output', else runs/<name>)")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="compare a scenario's final state with a closed-form oracle")
    o.add_argument("scenario")
    o.add_argument("--oracle", required=True, help="FreePlane2D, FreeSpace3DRadial or ImagesQuotient(N)")
    o.add_argument("--tol", type=float, required=True, help="relative L2 tolerance")
    o.add_argument("--r-max", type=float, default=None, help="radius of the comparison disc (default 0.9)")
    o.add_argument("--out", help="optional bundle directory")
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sweep", help="run a scenario template over values of one parameter")
    s.add_argument("template")
    s.add_argument("--axis", required=True, help="sigma, M, modes, k, rho, c, or a dotted path like data.xbar")
    s.add_argument("--values", required=True, help="comma-separated values, e.g. 0.02,0.015,0.01 or pi,2*pi/3")
    s.add_argument("--out", help="sweep directory (default: runs/<name>-sweep)")
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("report", help="summarise a bundle and verify its manifest")
    b.add_argument("bundle")
    b.set_defaults(func=cmd_report)

    c = sub.add_parser("scenarios", help="list built-in scenarios")
    c.add_argument("--dump", metavar="NAME", help="print one built-in scenario as JSON")
    c.set_defaults(func=cmd_scenarios)

    sc = sub.add_parser("schema", help="print the scenario JSON schema")
    sc.set_defaults(func=cmd_schema)
    return p


def _default_out(args) -> None:
    if getattr(args, "out", None) or args.command not in ("run", "sweep"):
        return
    src = args.scenario if args.command == "run" else args.template
    sc = runner.load_scenario(src)
    if sc.output:
        args.out = sc.output
    else:
        suffix = "-sweep" if args.command == "sweep" else ""
        args.out = os.path.join("runs", sc.name + suffix)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        with thread_limit():
            _default_out(args)
            return args.func(args)
    except runner.StageError as exc:
        diag = exc.diagnostic()
        print(json.dumps({"status": "error", **diag}), file=sys.stderr)
        config = diag["stage"] == "validate" or isinstance(exc.cause, ScenarioError)
        return EXIT_USAGE if config else EXIT_FAIL
    except (ScenarioError, ParameterError, OSError) as exc:
        print(json.dumps({"status": "error", "stage": "validate", "error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
