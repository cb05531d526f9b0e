"""
Plan Command Module

This module implements the ``plan`` sub-command: plan one scenario and write
the trajectory samples, the analytic pieces, the corridors, the primitive
selection and the plan report.
"""

import argparse
import logging
import os
from typing import Dict

from config.config_manager import get_config
from core.constants import ExitCode
from planner.models import PlanResult, PlanStatus
from planner.planner import plan
from world.map_io import read_scenario_file

logger = logging.getLogger(__name__)

STATUS_EXIT_CODES: Dict[PlanStatus, ExitCode] = {
    PlanStatus.SOLVED: ExitCode.OK,
    PlanStatus.SOLVED_ANALYTIC: ExitCode.OK,
    PlanStatus.NO_PATH: ExitCode.NO_PATH,
    PlanStatus.SOLVER_FAILURE: ExitCode.SOLVER_FAILURE,
    PlanStatus.DEGENERATE_INPUT: ExitCode.DEGENERATE_INPUT,
}

OUTPUT_FILES = {
    "samples": "trajectory.csv",
    "pieces": "pieces.json",
    "corridors": "corridors.json",
    "selection": "selection.json",
    "report": "report.json",
}


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
        if not text.endswith("\n"):
            f.write("\n")


def write_plan_outputs(result: PlanResult, out_dir: str, rate: float) -> Dict[str, str]:
    """
    Write every artifact the result holds into ``out_dir``.

    The report is always written; the other files only when the planner got
    far enough to produce them.

    Returns:
        Mapping from artifact kind to the written path
    """
    os.makedirs(out_dir, exist_ok=True)
    written: Dict[str, str] = {}

    def target(kind: str) -> str:
        path = os.path.join(out_dir, OUTPUT_FILES[kind])
        written[kind] = path
        return path

    if result.trajectory is not None:
        result.trajectory.write_csv(target("samples"), rate)
        _write_text(target("pieces"), result.trajectory.to_pieces_export())
    if result.sequence is not None:
        _write_text(target("corridors"), result.sequence.to_export())
    if result.selection is not None:
        _write_text(target("selection"), result.selection.to_json(indent=2))
    _write_text(target("report"), result.report.to_json(indent=2))
    return written


class PlanCommand:
    """Handler for the ``plan`` sub-command."""

    def __init__(self, subparsers: argparse._SubParsersAction):
        """
        Initialize the command handler.

        Args:
            subparsers: Sub-parser collection of the CommandManager parser
        """
        self.subparsers = subparsers
        self.register_command()

    def register_command(self) -> None:
        """Register the ``plan`` sub-command."""
        parser = self.subparsers.add_parser(
            "plan",
            help="Plan a trajectory for one scenario",
        )
        parser.add_argument("--scenario", required=True, help="Scenario JSON file")
        parser.add_argument("--out", required=True, help="Output directory")
        parser.add_argument(
            "--rate", type=float, default=None,
            help="Sampling rate of the CSV output in Hz (default: PLANNER_SAMPLE_RATE)",
        )
        parser.set_defaults(handler=self.run)

    def run(self, args: argparse.Namespace) -> int:
        """
        Plan the scenario and write the outputs.

        Returns:
            0 on Solved/SolvedAnalytic, the status exit code otherwise
        """
        config = get_config()
        rate = args.rate if args.rate is not None else float(config["sample_rate"])
        if rate <= 0:
            logger.error(f"Sampling rate must be positive, got {rate}")
            return ExitCode.USAGE

        scenario = read_scenario_file(args.scenario)
        logger.info(f"Planning scenario {args.scenario}")
        result = plan(scenario, config)
        written = write_plan_outputs(result, args.out, rate)

        report = result.report
        print(f"status: {report.status.value}")
        if report.status.succeeded:
            print(f"t_move: {report.t_move!r}")
        for kind, path in written.items():
            logger.info(f"Wrote {kind} to {path}")
        return STATUS_EXIT_CODES[report.status]


def setup_plan_command(subparsers: argparse._SubParsersAction) -> PlanCommand:
    """
    Set up the ``plan`` sub-command.

    Args:
        subparsers: Sub-parser collection to register with

    Returns:
        Command handler instance
    """
    return PlanCommand(subparsers)
