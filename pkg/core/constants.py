"""
Constants Module

This module defines constants used throughout the application.
"""

import logging
from enum import IntEnum
from typing import Tuple

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Breadth-first search neighbour order as (d_row, d_col): +x, -x, +y, -y
NEIGHBOR_ORDER: Tuple[Tuple[int, int], ...] = (
    (0, 1),
    (0, -1),
    (1, 0),
    (-1, 0),
)
logger.debug(f"Neighbor order defined: {NEIGHBOR_ORDER}")

# Map file symbols
FREE_CELL: str = "."
OCCUPIED_CELL: str = "#"
MAP_HEADER: str = "cells"

# Penalty weight on the free-direction acceleration slacks
SLACK_WEIGHT: float = 1e3

# Slack magnitude above which a solution is reported with a warning
SLACK_WARNING_THRESHOLD: float = 1e-4

# Inside-of-turn scale for waypoint selection
DEFAULT_MU: float = 20.0

# Duration ratios of the initial guess (tau', 7 tau', 0.2 tau')
INITIAL_TAU_RATIOS: Tuple[float, float, float] = (1.0, 7.0, 0.2)
logger.debug(f"Initial guess ratios defined: {INITIAL_TAU_RATIOS}")

# Acceptable mismatch between per-axis primitive durations (seconds)
TIME_MATCH_TOLERANCE: float = 1e-9

# Continuity tolerance between trajectory pieces (meters, meters/second)
CONTINUITY_TOLERANCE: float = 1e-7

# Tolerances applied when checking sampled trajectories
FEASIBILITY_TOLERANCE: float = 1e-6

# Minimum stage duration in the transcribed baseline (seconds)
MIN_STAGE_DURATION: float = 1e-3

# Rejection budget for random scenario generation
MAX_GENERATION_REJECTIONS: int = 10_000


class ExitCode(IntEnum):
    """Process exit codes of the command-line tools."""
    OK = 0
    VERDICT_FAILED = 1
    USAGE = 2
    IO_ERROR = 3
    PARSE_ERROR = 4
    NO_PATH = 10
    SOLVER_FAILURE = 11
    DEGENERATE_INPUT = 12
    GENERATION_STUCK = 13


logger.info("Constants module initialized successfully")
