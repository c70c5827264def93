"""Command line: ``qhydro run|verify|plot``.

Exit codes: 0 success, 2 bad configuration or missing artifacts, 3 solver
error (the message names the violated invariant), 1 failed verification.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, MissingArtifact, QHydroError

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _cmd_run(args) -> int:
    from .runner import output_dir, run_experiment

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else output_dir(cfg)
    try:
        manifest = run_experiment(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QHydroError, ValueError) as exc:
        print(f"solver error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"wrote {out} ({manifest['wall_time']:.1f} s)")
    for src, err in (manifest.get("max_rel_err") or {}).items():
        print(f"  {src}: max rel err {err:.3e}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verification import run_suite

    results = run_suite(args.suite, echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _cmd_plot(args) -> int:
    from .runner import write_plot_scripts

    try:
        paths = write_plot_scripts(args.record)
    except MissingArtifact as exc:
        print(f"missing artifact: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qhydro", description="Quantum hydrodynamics solvers")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("config")
    run.add_argument("--out", help="record directory (default: config output under $QHYDRO_OUT)")
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="run the built-in verification suite")
    verify.add_argument("--suite", choices=("quick", "full"), default="quick")
    verify.set_defaults(func=_cmd_verify)

    plot = sub.add_parser("plot", help="write gnuplot scripts for a record directory")
    plot.add_argument("record")
    plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
