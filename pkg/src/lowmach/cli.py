"""Command line entry point: ``lowmach run | converge | verify``.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, parse_config

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--case")
    p.add_argument("--scheme")
    p.add_argument("--epsilon", "--eps", dest="epsilon")
    p.add_argument("--gamma")
    p.add_argument("--cells", help="cells per axis")
    p.add_argument("--cfl", help="CFL constant (default 0.9 for o1, 0.45 otherwise)")
    p.add_argument("--tend", "--t-end", dest="tend")
    p.add_argument("--viscosity", help="implicit viscosity policy")
    p.add_argument("--out")
    p.add_argument("--no-plots", dest="plots", action="store_const", const="false")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lowmach", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="march one case and write snapshot, diagnostics, manifest"))
    c = sub.add_parser("converge", help="L-infinity errors and observed orders on a grid list")
    _common(c)
    c.add_argument("--grids", help="comma-separated cell counts (total cells in 2D)")
    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--quick", action="store_true", help="skip the long-running checks (6 and 10)")
    return ap


def _load(args):
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read {args.config}: {e}") from None
    keys = ["case", "scheme", "epsilon", "gamma", "cells", "cfl", "tend", "viscosity", "out", "plots", "grids"]
    overrides = {k: getattr(args, k, None) for k in keys}
    return parse_config(text, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from .runner import SolverFailure, run_convergence, run_single, write_convergence

    try:
        if args.command == "verify":
            from .acceptance import run_all

            only = None if not args.only else [int(s) for s in args.only.split(",")]
            return EXIT_OK if run_all(only=only, quick=args.quick) else EXIT_VERIFY
        cfg = _load(args)
        if args.command == "run":
            paths = run_single(cfg)
            res = paths["result"]
            print(f"{res.case} {res.scheme} eps={res.eps:g}: {res.n_steps} steps to t={res.t:.6g}, "
                  f"{res.fallbacks} fallbacks -> {paths['snapshot'].parent}")
        else:
            report = run_convergence(cfg)
            paths = write_convergence(cfg, report)
            print(report.to_csv(), end="")
            print(f"-> {paths['table']}")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as e:
        # raised by case builders for invalid combinations, e.g. non-square 2D grids
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
