"""
Validate Command Module

This module implements the ``validate`` sub-command: check a sampled
trajectory CSV against a map and a vehicle for collisions, bound violations
and inconsistent consecutive samples.
"""

import argparse
import logging

from core.constants import ExitCode, FEASIBILITY_TOLERANCE
from kinematics.trajectory import read_samples_csv
from planner.feasibility import validate_samples
from world.map_io import parse_vehicle_spec, read_map_file

logger = logging.getLogger(__name__)


class ValidateCommand:
    """Handler for the ``validate`` sub-command."""

    def __init__(self, subparsers: argparse._SubParsersAction):
        self.subparsers = subparsers
        self.register_command()

    def register_command(self) -> None:
        parser = self.subparsers.add_parser(
            "validate",
            help="Check a sampled trajectory for collisions, bounds and continuity",
        )
        parser.add_argument("--traj", required=True, help="Trajectory CSV (t,px,py,vx,vy,ax,ay)")
        parser.add_argument("--map", required=True, help="Map file")
        parser.add_argument("--vehicle", required=True, help="Vehicle as W,L,vmax,amax")
        parser.add_argument(
            "--tol", type=float, default=FEASIBILITY_TOLERANCE,
            help="Absolute tolerance on bounds and continuity",
        )
        parser.set_defaults(handler=self.run)

    def run(self, args: argparse.Namespace) -> int:
        """
        Print one verdict line per check.

        Returns:
            0 when every check passes, 1 otherwise
        """
        vehicle = parse_vehicle_spec(args.vehicle)
        grid = read_map_file(args.map)
        samples = read_samples_csv(args.traj)
        logger.info(f"Validating {len(samples)} samples from {args.traj}")

        verdicts = validate_samples(samples, grid, vehicle, args.tol)
        for verdict in verdicts:
            print(verdict.describe())
        passed = all(verdict.passed for verdict in verdicts)
        print("verdict: PASS" if passed else "verdict: FAIL")
        return ExitCode.OK if passed else ExitCode.VERDICT_FAILED


def setup_validate_command(subparsers: argparse._SubParsersAction) -> ValidateCommand:
    return ValidateCommand(subparsers)
