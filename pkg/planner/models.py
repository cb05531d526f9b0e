"""
Planner Models Module

Result types returned by the planner and the transcription baseline.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from dataclasses_json import dataclass_json

from corridors.models import CorridorSequence
from heuristics.selection import PrimitiveSelection
from kinematics.trajectory import Trajectory


class PlanStatus(str, Enum):
    SOLVED = "Solved"
    SOLVED_ANALYTIC = "SolvedAnalytic"
    SOLVER_FAILURE = "SolverFailure"
    NO_PATH = "NoPath"
    DEGENERATE_INPUT = "DegenerateInput"

    @property
    def succeeded(self) -> bool:
        return self in (PlanStatus.SOLVED, PlanStatus.SOLVED_ANALYTIC)


@dataclass_json
@dataclass
class PlanReport:
    """
    Outcome and timings of one planning query.

    Attributes:
        status: Final status
        t_solver: Seconds spent inside the optimizer, summed over all solves
        t_total: Seconds for the whole query (corridors, selection, solves, checks)
        t_move: Moving time of the returned trajectory (seconds)
        t_move_initial: Moving time before the flip loop (seconds)
        n_corridors: Number of corridors
        n_repair_rounds: Extremum repair rounds performed
        n_flip_rounds: Accepted sign-flip rounds
        solver_iterations: SQP iterations summed over all solves
        used_analytic: True when the obstacle-free plan was feasible
        max_slack: Largest free-acceleration slack at the solution
        message: Failure reason, empty on success
    """
    status: PlanStatus = PlanStatus.SOLVER_FAILURE
    t_solver: float = 0.0
    t_total: float = 0.0
    t_move: float = 0.0
    t_move_initial: float = 0.0
    n_corridors: int = 0
    n_repair_rounds: int = 0
    n_flip_rounds: int = 0
    solver_iterations: int = 0
    used_analytic: bool = False
    max_slack: float = 0.0
    message: str = ""


@dataclass
class PlanResult:
    """
    Everything a planning query produced.

    ``problem`` and ``solution`` hold the final optimization problem and
    its solution vector when the optimizer ran; ``initial_solution`` is the
    solution before the flip loop.
    """
    report: PlanReport
    trajectory: Optional[Trajectory] = None
    sequence: Optional[CorridorSequence] = None
    selection: Optional[PrimitiveSelection] = None
    problem: Optional[Any] = None
    solution: Optional[Any] = None
    initial_solution: Optional[Any] = field(default=None, repr=False)
