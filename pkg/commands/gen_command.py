"""
Gen Command Module

This module implements the ``gen`` sub-command: write a seeded suite of
benchmark scenarios as JSON files with inline maps.
"""

import argparse
import logging
import os

from benchmark.generator import KINDS, BenchmarkConfig, generate_instances
from config.config_manager import get_config
from core.constants import ExitCode
from world.map_io import dump_scenario

logger = logging.getLogger(__name__)


def add_suite_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments shared by ``gen`` and ``bench`` for describing a suite."""
    parser.add_argument("--kind", choices=KINDS, default="random", help="Environment kind")
    parser.add_argument("--n", type=int, default=None, help="Number of instances")
    parser.add_argument("--seed", type=int, default=0, help="Base random seed")
    parser.add_argument("--density", type=float, default=None, help="Obstacle density")
    parser.add_argument("--map", default=None, help="Map file for the structured kind")


def suite_config(args: argparse.Namespace) -> BenchmarkConfig:
    """
    Build the suite description from the command-line arguments.

    Raises:
        ValueError: If the arguments describe an invalid suite.
    """
    return BenchmarkConfig.from_config(
        get_config(),
        kind=args.kind,
        instances=args.n,
        seed=args.seed,
        density=args.density,
        map_path=args.map,
    )


class GenCommand:
    """Handler for the ``gen`` sub-command."""

    def __init__(self, subparsers: argparse._SubParsersAction):
        self.subparsers = subparsers
        self.register_command()

    def register_command(self) -> None:
        parser = self.subparsers.add_parser(
            "gen",
            help="Generate a seeded suite of benchmark scenarios",
        )
        add_suite_arguments(parser)
        parser.add_argument("--out", required=True, help="Output directory")
        parser.set_defaults(handler=self.run)

    def run(self, args: argparse.Namespace) -> int:
        try:
            bench = suite_config(args)
        except ValueError as e:
            logger.error(f"Invalid suite: {e}")
            return ExitCode.USAGE

        scenarios = generate_instances(bench)
        os.makedirs(args.out, exist_ok=True)
        for index, scenario in enumerate(scenarios):
            path = os.path.join(args.out, f"scenario_{index:03d}.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write(dump_scenario(scenario))
        print(f"wrote {len(scenarios)} scenarios to {args.out}")
        return ExitCode.OK


def setup_gen_command(subparsers: argparse._SubParsersAction) -> GenCommand:
    return GenCommand(subparsers)
