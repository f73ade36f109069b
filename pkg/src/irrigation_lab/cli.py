"""Command-line interface: one subcommand per experiment kind.

Usage: ``irrigation-lab <kind> [--key value]... [--config file] [--out path]
[--seed u64] [--reps N] [--threads N] [--plot]``.  A config file supplies
key=value defaults; explicit flags override it.  Exit codes: 0 success,
2 usage/config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .harness import (
    KINDS,
    SCHEMAS,
    ConfigError,
    ExperimentSpec,
    coerce_param,
    parse_config,
    run,
)

__all__ = ["build_parser", "main"]

_KIND_HELP = {
    "points": "sample uniform torus points and report quadrant balance",
    "rgg-connectivity": "random geometric graph connectivity near the threshold radius",
    "giant": "irrigation-graph component census",
    "c1-scan": "largest-component tail scan for single-request graphs",
    "web": "discretized web construction, coverage, and hookup fraction",
    "mixed-perc": "mixed site/bond percolation vs its site-equivalent reduction",
    "gw": "thinned Galton-Watson extinction: exact, bound, and Monte Carlo",
    "brw": "branching random walk occupancy on the box lattice",
    "bounds": "closed-form thresholds and tail bounds with named arguments",
    "sweep": "Cartesian parameter sweep over another kind",
}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="FILE", help="key=value config file; explicit flags override it"
    )
    common.add_argument(
        "--out",
        metavar="PATH",
        help="write the result CSV here (JSON summary and figures become siblings)",
    )
    common.add_argument(
        "--seed", type=_u64, default=None, metavar="U64", help="master seed (default: 0)"
    )
    common.add_argument(
        "--reps", type=int, default=None, metavar="N", help="replicate count (default: 1)"
    )
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        metavar="N",
        help="worker threads across replicates (default: 1)",
    )
    common.add_argument(
        "--plot",
        action="store_true",
        default=None,
        help="render metric figures next to the CSV (requires --out)",
    )

    parser = argparse.ArgumentParser(
        prog="irrigation-lab",
        description="Experiments on random geometric irrigation graphs.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", metavar="<kind>", required=True)
    for kind in KINDS:
        p = sub.add_parser(
            kind, parents=[common], help=_KIND_HELP[kind], description=_KIND_HELP[kind]
        )
        if kind == "sweep":
            p.add_argument("--over", metavar="KIND", help="experiment kind to sweep")
            p.add_argument(
                "--grid",
                action="append",
                default=[],
                metavar="PARAM=V1|V2",
                help="grid axis for the swept kind; repeatable",
            )
            p.add_argument(
                "--param",
                action="append",
                default=[],
                metavar="KEY=VALUE",
                help="base parameter for the swept kind; repeatable",
            )
        else:
            for name, param in SCHEMAS[kind].items():
                flags = [f"--{name}"]
                if "_" in name:
                    flags.append(f"--{name.replace('_', '-')}")
                p.add_argument(
                    *flags,
                    dest=name,
                    default=None,
                    metavar=param.kind.upper(),
                    help=f"{param.help} (default: {param.default})",
                )
    return parser


def _split_pair(entry: str, flag: str) -> tuple[str, str]:
    if "=" not in entry:
        raise ConfigError(f"{flag} expects KEY=VALUE, got {entry!r}")
    key, value = entry.split("=", 1)
    return key.strip(), value


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    base = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = parse_config(fh.read())
        if base.kind != args.kind:
            raise ConfigError(
                f"config kind {base.kind!r} does not match subcommand {args.kind!r}"
            )

    params = dict(base.params) if base else {}
    grid = dict(base.grid) if base else {}
    if args.kind == "sweep":
        over = args.over or str(params.get("over", "")) or None
        if not over or over not in SCHEMAS or over == "sweep":
            raise ConfigError("sweep needs --over <kind>")
        params["over"] = over
        for entry in args.param:
            key, value = _split_pair(entry, "--param")
            params[key] = coerce_param(over, key, value)
        for entry in args.grid:
            name, values = _split_pair(entry, "--grid")
            grid[name] = [coerce_param(over, name, v) for v in values.split("|")]
    else:
        for name in SCHEMAS[args.kind]:
            raw = getattr(args, name)
            if raw is not None:
                params[name] = coerce_param(args.kind, name, str(raw))

    def pick(cli_value, base_value, default):
        if cli_value is not None:
            return cli_value
        return base_value if base is not None else default

    return ExperimentSpec(
        kind=args.kind,
        params=params,
        master_seed=pick(args.seed, base.master_seed if base else None, 0),
        replicates=pick(args.reps, base.replicates if base else None, 1),
        out=pick(args.out, base.out if base else None, None),
        threads=pick(args.threads, base.threads if base else None, 1),
        plot=pick(args.plot, base.plot if base else None, False),
        grid=grid,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = _spec_from_args(args)
        run(spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures map to exit code 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
