"""Command line entry point: ``magspec <subcommand> --config run.json --out dir/``.

Exit codes: 0 all checks pass, 1 a numerical check failed, 2 configuration
error, 3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

from ..errors import ConfigError, DomainError, ResourceCapExceeded
from .config import SUBCOMMANDS, load_config
from .io import write_report
from .runners import RUNNERS

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3
THREADS_ENV = "MAGSPEC_THREADS"


def build_parser():
    parser = argparse.ArgumentParser(prog="magspec", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, type=Path, help="run configuration (JSON)")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker count (default: ${THREADS_ENV} or 1)")
    return parser


def resolve_threads(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}", "") from None


def _error_report(out, subcommand, seed, status, message, pointer=None):
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_report(out / "report.json", {"subcommand": subcommand, "seed": seed,
                                           "status": status, "error": message,
                                           "pointer": pointer, "checks": []})
    except OSError:
        pass


def run(subcommand, config, out, seed=0, threads=None) -> int:
    """Execute one subcommand; returns the process exit code."""
    out = Path(out)
    try:
        threads = resolve_threads(threads)
        cfg = load_config(config, subcommand)
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            outcome = RUNNERS[subcommand](cfg, out, seed, threads)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "pointer": exc.pointer or "", "message": str(exc)}),
              file=sys.stderr)
        _error_report(out, subcommand, seed, "config-error", str(exc), exc.pointer or "")
        return EXIT_CONFIG
    except ResourceCapExceeded as exc:
        print(json.dumps({"error": "resource-cap", "message": str(exc)}), file=sys.stderr)
        _error_report(out, subcommand, seed, "resource-cap", str(exc))
        return EXIT_CAP
    except (DomainError, ArithmeticError) as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        _error_report(out, subcommand, seed, "fail", str(exc))
        return EXIT_FAIL
    warn_rows = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    report = {
        "subcommand": subcommand,
        "seed": seed,
        "config": cfg.raw,
        "status": "pass" if outcome.passed else "fail",
        "checks": [c.to_json() for c in outcome.checks],
        "results": outcome.results,
        "warnings": warn_rows,
        "artifacts": sorted(outcome.artifacts),
    }
    write_report(out / "report.json", report)
    for c in outcome.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}")
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.out, args.seed, args.threads)


if __name__ == "__main__":
    sys.exit(main())
