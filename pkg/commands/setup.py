"""
Commands Setup Module

This module builds the command-line parser, registers every sub-command and
maps library errors to process exit codes.
"""

import argparse
import logging
from typing import List, Optional

from commands.bench_command import setup_bench_command
from commands.gen_command import setup_gen_command
from commands.plan_command import setup_plan_command
from commands.validate_command import setup_validate_command
from config.config_manager import get_config
from core.constants import ExitCode
from core.exceptions import GenerationStuck, ParseError, PlannerError, ValidationError
from logging_config import setup_logging

logger = logging.getLogger(__name__)


class CommandManager:
    """Manager for the command-line sub-commands."""

    def __init__(self, prog: str = "corridor-planner"):
        """
        Initialize the command manager.

        Args:
            prog: Program name shown in usage messages
        """
        logger.debug("Creating command-line parser")
        self.parser = argparse.ArgumentParser(
            prog=prog,
            description="Near time-optimal corridor planning with motion primitives",
        )
        self.parser.add_argument(
            "--log-level", default=None,
            help="Logging level (default: LOG_LEVEL or INFO)",
        )
        self.parser.add_argument(
            "--log-file", default=None,
            help="Log file; '{timestamp}' is replaced (default: LOG_FILE)",
        )
        subparsers = self.parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True

        self.plan_command = setup_plan_command(subparsers)
        self.bench_command = setup_bench_command(subparsers)
        self.validate_command = setup_validate_command(subparsers)
        self.gen_command = setup_gen_command(subparsers)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse ``argv``, configure logging and dispatch to the sub-command.

        Returns:
            Process exit code
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code) if isinstance(e.code, int) else int(ExitCode.USAGE)

        config = get_config()
        try:
            setup_logging(args.log_level or config["log_level"], args.log_file or config["log_file"])
        except ValueError as e:
            self.parser.print_usage()
            print(f"error: {e}")
            return ExitCode.USAGE

        try:
            return int(args.handler(args))
        except OSError as e:
            logger.error(f"I/O error: {e}")
            return ExitCode.IO_ERROR
        except (ParseError, ValidationError) as e:
            logger.error(f"Invalid input: {e}")
            return ExitCode.PARSE_ERROR
        except GenerationStuck as e:
            logger.error(f"Scenario generation failed: {e}")
            return ExitCode.GENERATION_STUCK
        except PlannerError as e:
            logger.error(f"Planning error: {e}", exc_info=True)
            return ExitCode.SOLVER_FAILURE


def setup_commands(prog: str = "corridor-planner") -> CommandManager:
    """
    Set up all sub-commands.

    Args:
        prog: Program name shown in usage messages

    Returns:
        Command manager instance
    """
    logger.debug("Setting up sub-commands")
    return CommandManager(prog)
