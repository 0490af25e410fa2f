"""
Command-line entry point: fracopt synthetic|isac|mimo|rates|verify
"""
import argparse
import json
import logging
import sys
from pathlib import Path

from fracopt.experiments import EXPERIMENT_COMMANDS, EXPERIMENT_PRESETS, build_run_config
from fracopt.linalg import SPECTRAL_MODES
from fracopt.rates import cmd_rates
from fracopt.utils import FracoptError, InvalidParams
from fracopt.verify import DEFAULT_VERIFY_SEED, cmd_verify

from utils.cli_helpers import (
    get_output_directory,
    load_config_file,
    merge_settings,
    parse_scale,
    parse_solver_list,
)

BASE_DIR = Path(__file__).parent.resolve()
DEFAULT_OUTPUT = BASE_DIR / "output"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

logger = logging.getLogger("fracopt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracopt", description="Quadratic-transform solver benchmarks")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress at DEBUG level")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")
    commands = parser.add_subparsers(dest="command", required=True)

    for name in EXPERIMENT_PRESETS:
        sweep = commands.add_parser(name, help=f"Run the {name} experiment")
        sweep.add_argument("--config", help="JSON file mirroring the run configuration")
        sweep.add_argument("--seed", type=int, help="Parent seed of the sweep")
        sweep.add_argument("--solvers", help="Comma-separated solver ids")
        sweep.add_argument("--iters", type=int, help="Maximum iterations per run")
        sweep.add_argument("--tol", type=float, help="Relative objective-change stopping tolerance")
        sweep.add_argument("--jobs", type=int, help="Runs executed in parallel")
        sweep.add_argument("--instances", type=int, help="Number of random instances")
        sweep.add_argument("--lambda-mode", choices=SPECTRAL_MODES, help="Spectral bound of the nonhomogeneous steps")
        sweep.add_argument("--with-t", action="store_true", default=None, help="Write per-iteration t_i columns")
        sweep.add_argument("--scale", help="Overrides such as d=64,n=3")
        sweep.add_argument("--out", help="Output directory")

    rates = commands.add_parser("rates", help="Fit convergence rates of trace CSV files")
    rates.add_argument("traces", nargs="+", help="Trace CSV files")
    rates.add_argument("--f-star", default="best", help="'best' or a reference optimum")
    rates.add_argument("--min-iter", type=int, default=1, help="First iteration of the fit window")
    rates.add_argument("--out", help="Directory receiving rates.json")

    verify = commands.add_parser("verify", help="Run the property suites")
    verify.add_argument("suite", nargs="?", default="", help="Suite id (all suites when omitted)")
    verify.add_argument("--seed", type=int, default=DEFAULT_VERIFY_SEED, help="Seed of the random instances")
    return parser


def configure_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def run_experiment(args) -> int:
    try:
        flags = {
            "seed": args.seed,
            "solvers": parse_solver_list(args.solvers),
            "max_iters": args.iters,
            "rel_obj_tol": args.tol,
            "jobs": args.jobs,
            "instances": args.instances,
            "lambda_mode": args.lambda_mode,
            "with_t": args.with_t,
            "scale": parse_scale(args.scale) or None,
        }
        settings = merge_settings(load_config_file(args.config), flags)
        out_dir = get_output_directory(BASE_DIR, args.out, DEFAULT_OUTPUT / args.command)
        config = build_run_config(args.command, settings, out_dir)
    except (ValueError, TypeError) as exc:
        logger.error(f"Invalid configuration: {exc}")
        return EXIT_USAGE

    try:
        summary = EXPERIMENT_COMMANDS[args.command](config)
    except InvalidParams as exc:
        logger.error(f"Invalid scenario parameters: {exc}")
        return EXIT_USAGE
    except FracoptError as exc:
        logger.error(str(exc))
        return EXIT_FAILURE

    print(json.dumps(summary, indent=2))
    return EXIT_OK


def run_rates(args) -> int:
    out_dir = get_output_directory(BASE_DIR, args.out, BASE_DIR) if args.out else None
    try:
        results = cmd_rates(args.traces, args.f_star, args.min_iter, out_dir)
    except (ValueError, OSError) as exc:
        logger.error(f"Cannot fit rates: {exc}")
        return EXIT_USAGE
    except FracoptError as exc:
        logger.error(str(exc))
        return EXIT_FAILURE
    print(json.dumps(results, indent=2))
    return EXIT_OK


def run_verify(args) -> int:
    try:
        report = cmd_verify(args.suite, args.seed)
    except ValueError as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except FracoptError as exc:
        logger.error(f"Suite aborted: {exc}")
        return EXIT_FAILURE
    print(json.dumps(report, indent=2))
    return EXIT_OK if report["passed"] else EXIT_FAILURE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    if args.command == "rates":
        return run_rates(args)
    if args.command == "verify":
        return run_verify(args)
    return run_experiment(args)


if __name__ == "__main__":
    sys.exit(main())
