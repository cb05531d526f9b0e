"""
Bench Command Module

This module implements the ``bench`` sub-command: generate a suite, run the
primitive planner and the transcription baseline on every instance and
write the results, the timings and the summary.
"""

import argparse
import logging

from benchmark.generator import generate_instances
from benchmark.runner import run_benchmark, write_results
from commands.gen_command import add_suite_arguments, suite_config
from config.config_manager import get_config
from core.constants import ExitCode

logger = logging.getLogger(__name__)


class BenchCommand:
    """Handler for the ``bench`` sub-command."""

    def __init__(self, subparsers: argparse._SubParsersAction):
        """
        Initialize the command handler.

        Args:
            subparsers: Sub-parser collection of the CommandManager parser
        """
        self.subparsers = subparsers
        self.register_command()

    def register_command(self) -> None:
        """Register the ``bench`` sub-command."""
        parser = self.subparsers.add_parser(
            "bench",
            help="Compare the primitive planner with the transcription baseline",
        )
        add_suite_arguments(parser)
        parser.add_argument("--out", required=True, help="Output directory")
        parser.add_argument(
            "--baseline-grid", type=int, default=None,
            help="Intervals per corridor of the baseline (default: BASELINE_GRID_POINTS)",
        )
        parser.add_argument(
            "--compare-grid", type=int, default=None,
            help="Also run the baseline with this many intervals per corridor",
        )
        parser.add_argument("--workers", type=int, default=1, help="Worker processes")
        parser.set_defaults(handler=self.run)

    def run(self, args: argparse.Namespace) -> int:
        """
        Run the suite; per-instance failures end up in the results.

        Returns:
            0 once the outputs are written
        """
        try:
            bench = suite_config(args)
        except ValueError as e:
            logger.error(f"Invalid suite: {e}")
            return ExitCode.USAGE
        for name in ("baseline_grid", "compare_grid"):
            value = getattr(args, name)
            if value is not None and value < 1:
                logger.error(f"--{name.replace('_', '-')} must be positive, got {value}")
                return ExitCode.USAGE
        if args.workers < 1:
            logger.error(f"--workers must be positive, got {args.workers}")
            return ExitCode.USAGE

        scenarios = generate_instances(bench)
        outcomes = run_benchmark(
            scenarios,
            get_config(),
            workers=args.workers,
            baseline_grid=args.baseline_grid,
            compare_grid=args.compare_grid,
        )
        paths = write_results(outcomes, args.out)
        print(f"summary: {paths['summary']}")
        return ExitCode.OK


def setup_bench_command(subparsers: argparse._SubParsersAction) -> BenchCommand:
    """
    Set up the ``bench`` sub-command.

    Args:
        subparsers: Sub-parser collection to register with

    Returns:
        Command handler instance
    """
    return BenchCommand(subparsers)
