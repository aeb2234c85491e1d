"""Command-line entry point: one subcommand per scenario kind.

Exit codes: 0 on success, 2 for configuration/validation failures
(including budget refusals), 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys

from wqed.errors import (
    BudgetExceededError,
    ConfigError,
    SingularCoefficientError,
    SteadyStateError,
    StepSizeError,
    ValidityError,
    WindowTooShortError,
    WqedError,
)
from wqed.scenarios import SCENARIO_KINDS, load_config, run_scenario

_VALIDATION_ERRORS = (ConfigError, BudgetExceededError, ValueError)
_NUMERIC_ERRORS = (
    SteadyStateError,
    StepSizeError,
    SingularCoefficientError,
    ValidityError,
    WindowTooShortError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wqed",
        description="Atom-chain waveguide photon-transport scenarios",
    )
    sub = parser.add_subparsers(dest="kind", required=True, metavar="SCENARIO")
    for kind in SCENARIO_KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} scenario from a config file")
        p.add_argument("--config", required=True, help="YAML scenario configuration")
        p.add_argument("--out", help="output path prefix (overrides the config)")
        p.add_argument("--threads", type=int, help="worker threads (or WQED_THREADS)")
        p.add_argument("--budget", type=float, help="operation budget override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.kind != args.kind:
            raise ConfigError(
                f"config is a {cfg.kind!r} scenario but the {args.kind!r} subcommand was used"
            )
        if args.out:
            cfg.out = args.out
        if args.threads is not None:
            cfg.threads = args.threads
        if args.budget is not None:
            cfg.budget = args.budget
        manifest = run_scenario(cfg)
    except _VALIDATION_ERRORS as exc:
        print(f"wqed: configuration error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"wqed: numerical failure: {exc}", file=sys.stderr)
        return 3
    except WqedError as exc:
        print(f"wqed: error: {exc}", file=sys.stderr)
        return 3

    print(f"run {manifest.run_id}: {len(manifest.files)} file(s), {manifest.wall_clock_s:.2f}s")
    for entry in manifest.files:
        print(f"  {entry['path']}  [{', '.join(entry['columns'])}]")
    print(f"  {manifest.path}")
    for key, value in manifest.summary.items():
        if not isinstance(value, (dict, list)):
            print(f"  {key} = {value}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
