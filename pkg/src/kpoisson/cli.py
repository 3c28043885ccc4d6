"""Command line entry point: ``verify <suite> [options]``."""
from __future__ import annotations

import argparse
import sys

from .verify import SUITES, SuiteConfig, emit_report, run_suite, validate


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")
    if not dims:
        raise argparse.ArgumentTypeError("no dimensions given")
    return dims


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be a nonnegative integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="verify",
        description="Run seeded numerical identity suites and report the largest errors.")
    p.add_argument("suite", choices=SUITES + ("all",))
    p.add_argument("--dims", type=_dims, default=(4, 5, 6),
                   help="comma separated total dimensions (default 4,5,6)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--samples", type=int, default=100,
                   help="base sample count; per-check counts scale with it (default 100)")
    p.add_argument("--tol", type=float, default=None,
                   help="numeric tolerance for sampled identities (default 1e-9)")
    p.add_argument("--tol-structural", type=float, default=None,
                   help="tolerance for exact algebraic identities (default 1e-10)")
    p.add_argument("--tol-fd", type=float, default=None,
                   help="tolerance for finite-difference comparisons (default 1e-6)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None, help="also write the report to this file")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in (("tol_numeric", args.tol),
                                   ("tol_structural", args.tol_structural),
                                   ("tol_fd", args.tol_fd)) if v is not None}
    cfg = SuiteConfig(dims=args.dims, seed=args.seed, samples=args.samples, **overrides)
    try:
        validate(args.suite, cfg)
    except ValueError as exc:
        parser.error(str(exc))
    report = run_suite(args.suite, cfg)
    out = emit_report(report, args.format)
    if args.format == "json":
        out += "\n"
    sys.stdout.write(out)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
