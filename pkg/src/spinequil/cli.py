"""Command-line entry point: ``spinequil <subcommand> [options]``."""

import argparse
import logging
import sys

from . import runner
from .config import load_config

logger = logging.getLogger("spinequil")

COMMANDS = {
    "deff-sweep": runner.run_deff_sweep,
    "ldos": runner.run_ldos,
    "evolve": runner.run_evolution,
    "teq": runner.run_teq,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", dest="out_dir", help="output directory")
    common.add_argument("--n-min", type=int)
    common.add_argument("--n-max", type=int)
    common.add_argument("--k-max", type=int, help="use flip counts 0..k_max")
    common.add_argument("--case", choices=["a", "b", "both"])
    common.add_argument("--direction", action="append",
                        help="z, x, y or angles:<theta_deg>,<phi_deg>; repeatable")
    common.add_argument("--threads", type=int)
    common.add_argument("--dim-cap", type=int)
    common.add_argument("--seedless", action="store_true",
                        help="reject configurations that request randomness")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="spinequil",
        description="Equilibration of coarse-grained initial states in a chaotic spin chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("deff-sweep", "effective dimension versus Hilbert dimension, with power-law fits"),
        ("ldos", "local density of states and density of states histograms"),
        ("evolve", "time evolution of the relative magnetization fluctuation"),
        ("teq", "equilibration-time estimates versus chain length"),
        ("validate", "check a configuration file and print the resolved settings"),
    ]:
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def overrides_from_args(args):
    over = {
        "out_dir": args.out_dir,
        "n_min": args.n_min,
        "n_max": args.n_max,
        "threads": args.threads,
        "dim_cap": args.dim_cap,
    }
    if args.k_max is not None:
        over["k_values"] = list(range(args.k_max + 1))
    if args.case is not None:
        over["cases"] = ["a", "b"] if args.case == "both" else [args.case]
    if args.direction:
        over["directions"] = args.direction
    return over


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    result = load_config(args.config, overrides=overrides_from_args(args), seedless=args.seedless)
    for issue in result.warnings:
        logger.warning("config %s", issue)
    if not result.ok:
        for issue in result.errors:
            print(f"error: {issue}", file=sys.stderr)
        return 2
    config = result.config

    if args.command == "validate":
        for key, value in config.to_dict().items():
            print(f"{key} = {value!r}")
        return 0

    run = COMMANDS[args.command](config)
    for path in run.files:
        print(path)
    logger.info("%d/%d points completed, %d skipped, %d failed",
                run.completed, run.requested, len(run.skipped), len(run.failed))
    return run.exit_code


if __name__ == "__main__":
    sys.exit(main())
