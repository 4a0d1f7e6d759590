"""
Command-line entry point.

    aprxlik twolevel-figure --config cfg.json --out-dir results --threads 8
    aprxlik logz --rows 4 --cols 4 --beta 0.3 --boundary free --method transfer
    aprxlik selftest

Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
numerical routine fails.
"""

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from dotenv import load_dotenv

from src.config import ConfigurationError
from src.harness.ising_outputs import run_ising_outputs
from src.harness.models import Experiment, ExperimentConfig
from src.harness.selftest import CHECKS, run_selftest
from src.harness.twolevel_figure import run_twolevel_figure
from src.inference.errors import NumericalError
from src.ising.lattice import Boundary, IsingParams, LatticeSpec
from src.ising.partition import ZMethod
from src.logging_setup import configure_logging, get_logger


log = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _experiment_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out-dir", type=Path, default=Path("results"), help="directory for CSV output")
    common.add_argument("--threads", type=int, help="worker threads (default $APRXLIK_THREADS)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aprxlik", description="Approximate-likelihood experiments and oracles")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _experiment_flags()

    sub.add_parser("twolevel-figure", parents=[common], help="two-level exact vs Laplace comparison")
    sub.add_parser("ising-bbeta", parents=[common], help="b_beta curve over beta")
    sub.add_parser("ising-contour", parents=[common], help="score-error contour over (m, k)")
    sub.add_parser("ising-trapezium", parents=[common], help="trapezium remainder decay fits")

    logz = sub.add_parser("logz", help="one log normalizing constant")
    logz.add_argument("--rows", type=int, required=True)
    logz.add_argument("--cols", type=int, required=True)
    logz.add_argument("--alpha", type=float, default=0.0)
    logz.add_argument("--beta", type=float, required=True)
    logz.add_argument("--boundary", choices=[b.value for b in Boundary], default=Boundary.FREE.value)
    logz.add_argument("--method", default="transfer", help="brute | transfer | kaufman | rda(k) | proxy(k)")

    selftest = sub.add_parser("selftest", help="run the oracle-equivalence checks")
    selftest.add_argument("--only", action="append", choices=list(CHECKS), help="run just this check")
    return parser


def _load_experiment(args: argparse.Namespace, experiment: Experiment) -> ExperimentConfig:
    return ExperimentConfig.load(args.config, experiment=experiment, seed=args.seed, threads=args.threads)


def _run(args: argparse.Namespace) -> int:
    if args.command == "logz":
        lattice = LatticeSpec(args.rows, args.cols, Boundary(args.boundary))
        try:
            method = ZMethod.parse(args.method)
            params = IsingParams(args.alpha, args.beta)
        except ValueError as e:
            raise UsageError(str(e)) from e
        print(f"{method.log_z(lattice, params):.17g}")
        return EXIT_OK

    if args.command == "selftest":
        report = run_selftest(args.only)
        for line in report.lines():
            print(line)
        return EXIT_OK if report.passed else EXIT_NUMERICAL

    experiment = Experiment(args.command)
    config = _load_experiment(args, experiment)
    if experiment is Experiment.TWOLEVEL_FIGURE:
        rows = run_twolevel_figure(config, args.out_dir)
        print(f"{len(rows)} rows written to {args.out_dir}")
    else:
        run_ising_outputs(config, args.out_dir)
        print(f"{experiment.value} written to {args.out_dir}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _run(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as e:
        log.error("cli.config_error", error=str(e))
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        log.exception("cli.numerical_failure", error=str(e))
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
