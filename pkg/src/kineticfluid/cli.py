"""Command-line entry point.

Subcommands:
    run               --config PATH [--out DIR] [--serial] [--set key=value ...]
    probe-coercivity  --dim D --order N [--samples K | --eigensolve] [--out JSON]
    fit               --series CSV --model exp|alg --window T0:T1 [--column E]
    resume            --checkpoint PATH --steps K [--out DIR] [--config PATH]

Exit codes: 0 ok, 2 configuration/parse error, 3 numerical divergence or
invalid state, 4 I/O failure, 5 iteration non-convergence.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    ConfigurationError,
    DimensionError,
    DivergenceError,
    DomainError,
    EntropyDomainError,
    IterationError,
    OrderError,
    PresetError,
    ShapeError,
    StateError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
EXIT_NONCONVERGENCE = 5

_CONFIG_ERRORS = (ConfigurationError, DimensionError, ShapeError, OrderError,
                  PresetError, DomainError)
_NUMERICAL_ERRORS = (StateError, DivergenceError, EntropyDomainError)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kfsim",
                                description="kinetic-fluid spectral simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a configured simulation")
    run.add_argument("--config", required=True, help="JSON run config")
    run.add_argument("--out", default=None, help="output directory override")
    run.add_argument("--serial", action="store_true",
                     help="force the deterministic serial mode (the default)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="config override, e.g. --set dt=1e-3 (flags beat file)")

    probe = sub.add_parser("probe-coercivity",
                           help="empirical coercivity constant of the collision operator")
    probe.add_argument("--dim", type=int, required=True)
    probe.add_argument("--order", type=int, required=True)
    group = probe.add_mutually_exclusive_group()
    group.add_argument("--samples", type=int, default=None,
                       help="random-sampling mode with this many samples")
    group.add_argument("--eigensolve", action="store_true",
                       help="exact generalized eigensolve (default)")
    probe.add_argument("--out", default=None, help="JSON record path")

    fit = sub.add_parser("fit", help="decay-rate fit on a series.csv column")
    fit.add_argument("--series", required=True)
    fit.add_argument("--model", choices=("exp", "alg"), required=True)
    fit.add_argument("--window", required=True, metavar="T0:T1")
    fit.add_argument("--column", default="E")

    res = sub.add_parser("resume", help="continue from a checkpoint")
    res.add_argument("--checkpoint", required=True)
    res.add_argument("--steps", type=int, required=True)
    res.add_argument("--out", default=None)
    res.add_argument("--config", default=None,
                     help="config echo to read stepping parameters from "
                          "(default: config.json next to the checkpoint)")
    return p


def main(argv=None) -> int:
    from . import harness

    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = harness.parse_config(args.config)
            overrides = {}
            for item in args.set:
                if "=" not in item:
                    raise ConfigurationError(f"bad override {item!r}; expected KEY=VALUE")
                key, value = item.split("=", 1)
                overrides[key] = value
            if args.out is not None:
                overrides["out_dir"] = args.out
            if args.serial:
                overrides["serial"] = "true"
            config = harness.apply_overrides(config, overrides)
            harness.cmd_run(config)
        elif args.command == "probe-coercivity":
            mode = "random" if args.samples is not None else "eigensolve"
            harness.cmd_probe_coercivity(args.dim, args.order, mode=mode,
                                         samples=args.samples or 1000,
                                         out_path=args.out)
        elif args.command == "fit":
            try:
                t0, t1 = (float(part) for part in args.window.split(":"))
            except ValueError:
                raise ConfigurationError(
                    f"bad window {args.window!r}; expected T0:T1") from None
            harness.cmd_fit(args.series, args.model, (t0, t1), column=args.column)
        elif args.command == "resume":
            harness.cmd_resume(args.checkpoint, args.steps, out_dir=args.out,
                               config_path=args.config)
    except _CONFIG_ERRORS as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as err:
        print(f"numerical error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except IterationError as err:
        print(f"non-convergence: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
