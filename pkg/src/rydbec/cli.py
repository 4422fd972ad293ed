"""Command-line front end.

Exit status: 0 on success, 2 for configuration errors, 3 for numerical
failures (trace drift, Fock truncation).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import NumericalError, ValidationError
from .scenario import (
    PRESETS,
    apply_overrides,
    check_complementarity,
    emit_csv,
    load_config,
    run_preset,
    run_scenario,
    series_to_csv,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cutoff", type=int, help="Fock cutoff N (highest retained level)")
    p.add_argument("--dt", type=float, help="integrator step in units of 1/lambda")
    p.add_argument("--tau-max", type=float, help="end of the scaled-time grid")
    p.add_argument("--points", type=int, help="number of grid points")
    p.add_argument("--kappa", type=float, help="condensate loss rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydbec",
        description="Entanglement dynamics of two impurity qubits in a Kerr condensate mode.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and write its CSV time series")
    run.add_argument("config")
    run.add_argument("-o", "--out", help="output CSV path (default: stdout)")
    run.add_argument("--raw-time", action="store_true", help="read --tau-max as unscaled time t")
    _add_overrides(run)

    pre = sub.add_parser("preset", help="reproduce the data behind a figure")
    pre.add_argument("name", choices=sorted(PRESETS))
    pre.add_argument("--out", required=True, help="output directory")
    pre.add_argument("-j", "--jobs", type=int, help="worker processes (default: one per CPU)")
    _add_overrides(pre)

    chk = sub.add_parser("check-complementarity", help="scan the complementarity residual")
    chk.add_argument("config")
    chk.add_argument("--raw-time", action="store_true", help="read --tau-max as unscaled time t")
    _add_overrides(chk)
    return parser


def _overrides(args, lambda_c: float = 1.0) -> dict:
    tau_max = args.tau_max
    if tau_max is not None and getattr(args, "raw_time", False):
        tau_max = tau_max * lambda_c
    return dict(cutoff=args.cutoff, dt=args.dt, tau_max=tau_max, points=args.points, kappa=args.kappa)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "preset":
            paths = run_preset(args.name, args.out, jobs=args.jobs, **_overrides(args))
            for p in paths:
                print(p)
            return 0
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, **_overrides(args, cfg.params.lambda_c))
        if args.command == "run":
            series = run_scenario(cfg)
            if args.out:
                emit_csv(series, args.out)
            else:
                sys.stdout.write(series_to_csv(series))
            return 0
        report = check_complementarity(cfg)
        print("\n".join(report.lines()))
        return 0
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        where = f" (tau={exc.time:.6g})" if getattr(exc, "time", None) is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
