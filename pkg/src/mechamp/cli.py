"""Command-line interface.

Subcommands: run / sweep / wigner / analytics take a config file; validate
needs none.  Exit codes: 0 success, 2 config error, 3 solver error,
4 acceptance/invariant failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, resolve_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateSteadyStateError,
    InvariantError,
    StiffnessError,
    TruncationError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4

_KIND_FILTER = {
    "run": None,
    "sweep": ("fig3_g2_sweep", "figS1_gaussian_compare", "figS3_squeezed_cavity"),
    "wigner": ("fig4_wigner_protocol", "figS2_decay"),
    "analytics": ("analytics_tables",),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechamp",
        description="Two-cavity optomechanics simulator with parametrically "
        "amplified mechanical coupling",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run any scenario from a config file"),
        ("sweep", "run a parameter-sweep scenario"),
        ("wigner", "run a pulsed Wigner-function protocol"),
        ("analytics", "emit the closed-form Green's-function tables"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to the scenario config file")
        _common_flags(p)
    p = sub.add_parser("validate", help="run the fast invariant suite")
    _common_flags(p)
    return parser


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--out-dir", default=None, help="output directory (overrides config)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (overrides config and MECHAMP_THREADS)")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"--override expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        overrides = _parse_overrides(args.override)
        if args.command == "validate":
            raw = {"schema": "1", "scenario": "validate"}
            raw.update(overrides)
            cfg = resolve_config(raw, out_dir=args.out_dir or "out/validate",
                                 threads=args.threads)
        else:
            cfg = load_config(args.config, overrides=overrides,
                              out_dir=args.out_dir, threads=args.threads)
            allowed = _KIND_FILTER[args.command]
            if allowed is not None and cfg.scenario not in allowed:
                raise ConfigError(
                    f"subcommand {args.command!r} expects one of {allowed}, "
                    f"config names {cfg.scenario!r}"
                )
        from .scenarios import run_scenario

        if cfg.scenario == "validate":
            from .validate import run_invariant_suite

            checks = run_invariant_suite()
            width = max(len(n) for n, _, _ in checks)
            failed = 0
            for name, ok, detail in checks:
                print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
                failed += 0 if ok else 1
            if failed:
                print(f"{failed}/{len(checks)} checks failed")
                return EXIT_INVARIANT
            print(f"all {len(checks)} checks passed")
            return EXIT_OK

        manifest = run_scenario(cfg)
        for key, value in sorted(manifest["summary"].items()):
            print(f"{key} = {value}")
        print(f"wrote {len(manifest['tables'])} tables to {cfg.out_dir}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StiffnessError, ConvergenceError, DegenerateSteadyStateError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (TruncationError, InvariantError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
