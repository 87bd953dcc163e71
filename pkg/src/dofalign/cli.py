"""Command-line front end: ``dofalign region|synthesize|simulate|verify``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import ConfigurationError, DomainError, SystemConfig
from .regions import build_region, scenario
from .schemes import DegenerateChannelError, build_space_freq_scheme
from .sim import default_threads, draw_block, estimate_slopes, parse_grid, plan_simulation, snr_sweep
from .verify import SUITES, missing_operations, run_suites, traced_operations

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _system(text: str) -> SystemConfig:
    try:
        return SystemConfig.parse(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from exc
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dofalign", description="DoF regions and blind alignment schemes for two-user MIMO channels")
    parser.add_argument("--threads", type=_positive, default=None, help="worker cap (default: DOF_ALIGN_THREADS or CPU count)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("region", help="print an exact DoF region")
    p.add_argument("--system", type=_system, required=True, metavar="M1,N1,M2,N2")
    p.add_argument("--channel", choices=["zic", "fic"], required=True)
    p.add_argument("--csit", choices=["yes", "no"], required=True)
    p.add_argument("--modes", type=_positive, default=None)
    p.add_argument("--format", choices=["json", "table"], default="table")

    p = sub.add_parser("synthesize", help="emit a scheme as JSON")
    p.add_argument("--system", type=_system, required=True, metavar="M1,N1,M2,N2")
    p.add_argument("--modes", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("simulate", help="Monte Carlo rate sweep")
    p.add_argument("--system", type=_system, required=True, metavar="M1,N1,M2,N2")
    p.add_argument("--channel", choices=["zic", "fic"], default="zic")
    p.add_argument("--modes", type=_positive, required=True)
    p.add_argument("--snr-db", default="0:10:50", metavar="A:STEP:B")
    p.add_argument("--trials", type=_positive, default=200)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--min-snr-db", type=float, default=30.0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    p.add_argument("--max-antennas", type=_positive, default=6)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--out", default="-")
    return parser


def _emit(text: str, target: str) -> None:
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def _fmt(q) -> str:
    return f"{str(q):>6} ({float(q):.4f})"


def cmd_region(args) -> int:
    scn = scenario(args.channel, "present" if args.csit == "yes" else "absent", args.modes)
    region = build_region(args.system, scn)
    if args.format == "json":
        _emit(json.dumps(region.to_dict(), indent=2) + "\n", "-")
        return EXIT_OK
    lines = ["inequalities:"]
    for h in region.inequalities:
        lines.append(f"  {_fmt(h.a1)} d1 + {_fmt(h.a2)} d2 <= {_fmt(h.b)}")
    lines.append("vertices:")
    for v in region.vertices:
        lines.append(f"  {_fmt(v.d1)}  {_fmt(v.d2)}")
    _emit("\n".join(lines) + "\n", "-")
    return EXIT_OK


def cmd_synthesize(args) -> int:
    config = args.system
    plan = plan_simulation(config, scenario("zic", "absent", args.modes))
    h12 = None
    if plan.k < plan.config.n1:
        h12 = draw_block(plan.config, plan.k, np.random.default_rng(args.seed)).h12
    scheme = build_space_freq_scheme(plan.config, plan.k, h12)
    _emit(scheme.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args, threads: int) -> int:
    grid = parse_grid(args.snr_db)
    curve = snr_sweep(args.system, scenario(args.channel, "absent", args.modes), grid, args.trials, args.seed, threads=threads)
    _emit(curve.to_csv(), args.out)
    est = estimate_slopes(curve, args.min_snr_db)
    out = sys.stderr if args.out == "-" else sys.stdout
    print(
        f"slopes over {list(est.window)} dB: d1={est.d1_hat:.4f} (se {est.stderr[0]:.4f}), "
        f"d2={est.d2_hat:.4f} (se {est.stderr[1]:.4f})",
        file=out,
    )
    return EXIT_OK


def cmd_verify(args, threads: int) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    if args.max_antennas > 6:
        raise DomainError("--max-antennas is limited to 6")
    doc: dict = {"seed": args.seed}
    if args.suite == "all":
        reports, seen = traced_operations(run_suites, names, args.max_antennas, args.seed, args.trials, threads=threads)
        doc["uncovered_operations"] = missing_operations(seen)
    else:
        reports = run_suites(names, args.max_antennas, args.seed, args.trials, threads=threads)
    doc["passed"] = all(r.passed for r in reports) and not doc.get("uncovered_operations")
    doc["suites"] = [r.to_dict() for r in reports]
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    for r in reports:
        print(f"{r.name}: {'pass' if r.passed else 'FAIL'} ({r.cases} cases, {r.wall_time:.2f}s)", file=sys.stderr)
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        threads = args.threads if args.threads is not None else default_threads()
        if args.command == "region":
            return cmd_region(args)
        if args.command == "synthesize":
            return cmd_synthesize(args)
        if args.command == "simulate":
            return cmd_simulate(args, threads)
        return cmd_verify(args, threads)
    except (UsageError, ConfigurationError, DomainError, DegenerateChannelError, ValueError) as exc:
        print(f"dofalign: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
