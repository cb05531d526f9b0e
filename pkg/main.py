"""
Main Module

This is the entry point for the corridor planner.
It builds the sub-commands and runs the one selected on the command line.
"""

import sys
from typing import List, Optional

from commands.setup import setup_commands


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the application.

    Args:
        argv: Command-line arguments without the program name

    Returns:
        Process exit code
    """
    manager = setup_commands()
    return manager.run(argv)


if __name__ == "__main__":
    sys.exit(main())
