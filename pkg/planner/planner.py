"""
Planner Module

Runs a planning query end to end:

1. build the corridor sequence,
2. return the obstacle-free analytic plan if it stays inside the corridors,
3. select primitives heuristically,
4. solve the primitive problem, adding extremum constraints until every
   extremum lies in its corridor,
5. flip the signs of waypoints the vehicle coasts straight through and
   re-solve while that shortens the moving time,
6. check the final trajectory.
"""

import logging
import time
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config.config_manager import get_config
from core.constants import FEASIBILITY_TOLERANCE, SLACK_WARNING_THRESHOLD
from core.exceptions import (
    DegenerateSequence,
    NoPath,
    SelectionMismatch,
    SolverFailure,
)
from core.geometry import GEOMETRY_TOLERANCE
from corridors.builder import build_corridor_sequence
from heuristics.selection import PrimitiveSelection, flip_sign, select_primitives
from kinematics.min_time import analytic_plan_2d
from nlp.problem import PrimitiveProblem, add_extremum_constraints, assemble, initial_guess
from nlp.solver import solve
from planner.feasibility import check_trajectory
from planner.models import PlanReport, PlanResult, PlanStatus
from world.models import Scenario

logger = logging.getLogger(__name__)

# Required moving-time improvement for accepting a flipped solution (seconds)
FLIP_IMPROVEMENT: float = 1e-9


class _SolveBudget:
    """Accumulates optimizer time and iterations across solves."""

    def __init__(self) -> None:
        self.solver_time = 0.0
        self.iterations = 0

    def add(self, stats: Any) -> None:
        if stats is None:
            return
        self.solver_time += stats.wall_time
        self.iterations += stats.iterations


def solve_with_repair(
    problem: PrimitiveProblem,
    guess: np.ndarray,
    config: Dict[str, Any],
    budget: Optional[_SolveBudget] = None
) -> Tuple[PrimitiveProblem, np.ndarray, int]:
    """
    Solve and add extremum constraints until no extremum leaves its corridor.

    Every repair round must strictly reduce the number of violating extrema.

    Returns:
        ``(final problem, solution, repair rounds)``

    Raises:
        SolverFailure: If a solve fails, the round cap is reached or a round
            does not reduce the violations.
    """
    budget = budget or _SolveBudget()
    max_rounds = int(config.get("max_repair_rounds", 5))
    tol = max(GEOMETRY_TOLERANCE, 10.0 * float(config.get("nlp_constraint_tolerance", 1e-9)))

    try:
        solution, stats = solve(problem, guess, config)
    except SolverFailure as e:
        budget.add(e.stats)
        if e.problem is None:
            e.problem = problem
        raise
    budget.add(stats)

    violations = problem.extremum_violations(solution, tol)
    rounds = 0
    while violations:
        if rounds >= max_rounds:
            raise SolverFailure(
                f"{len(violations)} extrema still outside their corridors after "
                f"{rounds} repair rounds",
                last_iterate=solution,
                problem=problem,
            )
        problem = add_extremum_constraints(problem, solution)
        rounds += 1
        try:
            repaired, stats = solve(problem, solution, config)
        except SolverFailure as e:
            budget.add(e.stats)
            if e.problem is None:
                e.problem = problem
            raise
        budget.add(stats)
        remaining = problem.extremum_violations(repaired, tol)
        logger.info(
            f"Repair round {rounds}: {len(violations)} -> {len(remaining)} violating extrema"
        )
        if len(remaining) >= len(violations):
            raise SolverFailure(
                f"Repair round {rounds} did not reduce violating extrema "
                f"({len(violations)} -> {len(remaining)})",
                last_iterate=repaired,
                problem=problem,
            )
        solution, violations = repaired, remaining

    return problem, solution, rounds


def _flip_loop(
    problem: PrimitiveProblem,
    solution: np.ndarray,
    selection: PrimitiveSelection,
    config: Dict[str, Any],
    budget: _SolveBudget,
    report: PlanReport
) -> Tuple[PrimitiveProblem, np.ndarray, PrimitiveSelection]:
    max_rounds = int(config.get("max_flip_rounds", 3))
    eps = float(config.get("coast_epsilon", 1e-4))

    for _ in range(max_rounds):
        coasting = problem.coasting_waypoints(solution, eps)
        if not coasting:
            break
        flipped = selection
        for k in coasting:
            flipped = flip_sign(flipped, k)
        logger.info(f"Flipping signs at coasting waypoints {coasting}")

        candidate = assemble(
            flipped, problem.sequence, problem.scenario, config,
            extremum_constraints=problem.extremum_constraints,
        )
        try:
            candidate, candidate_solution, rounds = solve_with_repair(
                candidate, solution, config, budget
            )
        except SolverFailure as e:
            logger.warning(f"Flipped problem failed, keeping previous solution: {e}")
            break
        report.n_repair_rounds += rounds

        before = problem.t_move(solution)
        after = candidate.t_move(candidate_solution)
        if after < before - FLIP_IMPROVEMENT:
            logger.info(f"Flip accepted: t_move {before:.6f}s -> {after:.6f}s")
            problem, solution, selection = candidate, candidate_solution, flipped
            report.n_flip_rounds += 1
        else:
            logger.warning(
                f"Flip rejected: t_move {before:.6f}s -> {after:.6f}s is no improvement"
            )
            break

    return problem, solution, selection


def _attach_last_iterate(result: PlanResult, failure: SolverFailure) -> None:
    """Keep the trajectory of a failed solve's last iterate for diagnosis."""
    problem, z = failure.problem, failure.last_iterate
    if problem is None or z is None or not np.all(np.isfinite(z)):
        return
    result.problem = problem
    result.solution = z
    result.trajectory = problem.trajectory(z)
    result.report.t_move = result.trajectory.t_move
    logger.info(
        f"Kept last iterate of the failed solve: t_move={result.report.t_move:.6f}s"
    )


def plan(scenario: Scenario, config: Optional[Dict[str, Any]] = None) -> PlanResult:
    """
    Plan a near time-optimal trajectory for a scenario.

    Args:
        scenario: Planning scenario
        config: Configuration (defaults to ``get_config()``)

    Returns:
        Plan result; failures are reported through ``report.status``

    Raises:
        ValidationError: If the scenario is invalid.
    """
    config = config or get_config()
    started = time.monotonic()
    report = PlanReport()
    result = PlanResult(report=report)
    rate = float(config.get("sample_rate", 100.0))

    def finish(status: PlanStatus, message: str = "") -> PlanResult:
        report.status = status
        report.message = message
        report.t_total = time.monotonic() - started
        if message:
            logger.warning(f"Planning finished with {status.value}: {message}")
        else:
            logger.info(
                f"Planning finished with {status.value}: t_move={report.t_move:.6f}s, "
                f"t_total={report.t_total * 1000:.3f}ms"
            )
        return result

    scenario.validate()
    if not scenario.cells_fit_vehicle():
        return finish(
            PlanStatus.DEGENERATE_INPUT,
            f"Cell size {scenario.grid.cell_size} is smaller than the vehicle footprint",
        )

    try:
        sequence = build_corridor_sequence(scenario)
    except NoPath as e:
        return finish(PlanStatus.NO_PATH, str(e))
    except DegenerateSequence as e:
        return finish(PlanStatus.DEGENERATE_INPUT, str(e))
    result.sequence = sequence
    report.n_corridors = len(sequence)

    analytic = analytic_plan_2d(scenario)
    if check_trajectory(analytic, sequence, scenario.vehicle, rate, GEOMETRY_TOLERANCE).feasible:
        result.trajectory = analytic
        report.used_analytic = True
        report.t_move = report.t_move_initial = analytic.t_move
        return finish(PlanStatus.SOLVED_ANALYTIC)

    budget = _SolveBudget()
    try:
        selection = select_primitives(sequence, scenario, config)
        result.selection = selection
        problem = assemble(selection, sequence, scenario, config)
        guess = initial_guess(selection, scenario, config)
        problem, solution, rounds = solve_with_repair(problem, guess, config, budget)
        report.n_repair_rounds = rounds
        report.t_move_initial = problem.t_move(solution)
        result.initial_solution = solution

        problem, solution, selection = _flip_loop(
            problem, solution, selection, config, budget, report
        )
        failure = None
    except SelectionMismatch as e:
        failure = (PlanStatus.DEGENERATE_INPUT, str(e))
    except SolverFailure as e:
        failure = (PlanStatus.SOLVER_FAILURE, str(e))
        _attach_last_iterate(result, e)

    report.t_solver = budget.solver_time
    report.solver_iterations = budget.iterations
    if failure is not None:
        return finish(*failure)
    result.selection = selection
    result.problem = problem
    result.solution = solution

    trajectory = problem.trajectory(solution)
    result.trajectory = trajectory
    report.t_move = trajectory.t_move
    report.max_slack = problem.max_slack(solution)
    if report.max_slack > SLACK_WARNING_THRESHOLD:
        logger.warning(f"Free-acceleration slack {report.max_slack:.3e} is active")

    check = check_trajectory(trajectory, sequence, scenario.vehicle, rate, FEASIBILITY_TOLERANCE)
    if not check.feasible:
        return finish(
            PlanStatus.SOLVER_FAILURE,
            f"Solution failed the feasibility check at t={check.first_violation_time}",
        )
    return finish(PlanStatus.SOLVED)
