"""
Transcription Baseline Module

Direct multiple-shooting transcription of the minimum-time problem through
the same corridor sequence, solved with the same SQP solver.

Stage ``s`` (one per corridor) has duration ``T_s`` split into ``N`` equal
intervals with piecewise-constant acceleration. States on the grid are
propagated exactly::

    p[i+1] = p[i] + v[i] h + a[i] h^2 / 2
    v[i+1] = v[i] + a[i] h,            h = T_s / N

Variable layout: ``M = n N + 1`` grid states ``[px, py, vx, vy]``, then
``n N`` controls ``[ax, ay]``, then the ``n`` stage durations.
"""

import logging
import time
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.config_manager import get_config
from core.constants import MIN_STAGE_DURATION
from core.exceptions import SolverFailure
from core.geometry import GEOMETRY_TOLERANCE, Vec2
from corridors.models import CorridorSequence
from kinematics.primitives import Primitive1D, Primitive2D
from kinematics.trajectory import Trajectory, TrajectoryPiece
from nlp.solver import solve
from planner.feasibility import inside_union
from planner.models import PlanReport, PlanResult, PlanStatus
from world.models import Scenario, Vehicle

logger = logging.getLogger(__name__)

# Fraction of v_max used by the straight-line initial guess
GUESS_SPEED_FRACTION: float = 0.5


class TranscribedOcp:
    """Multi-stage time-scaled transcription implementing ``NlpProblem``."""

    def __init__(
        self,
        sequence: CorridorSequence,
        scenario: Scenario,
        grid_points: int = 30
    ):
        if grid_points < 1:
            raise ValueError(f"grid_points must be positive, got {grid_points}")
        self.sequence = sequence
        self.scenario = scenario
        self.grid_points = grid_points
        self.n_stages = len(sequence)
        self.n_intervals = self.n_stages * grid_points
        self.n_states = self.n_intervals + 1
        self.inflated = sequence.inflated_boxes(scenario.vehicle)

        self._control_offset = 4 * self.n_states
        self._time_offset = self._control_offset + 2 * self.n_intervals
        self._size = self._time_offset + self.n_stages

        # Stage owning each interval
        intervals = np.arange(self.n_intervals)
        self._stage_of_interval = intervals // grid_points
        self._ineq_matrix, self._ineq_offset = self._build_linear_inequalities()
        self._boundary_rows, self._boundary_values = self._build_boundary()

    @property
    def n_variables(self) -> int:
        return self._size

    # Index helpers

    def position_index(self, i: int, axis: int) -> int:
        return 4 * i + axis

    def velocity_index(self, i: int, axis: int) -> int:
        return 4 * i + 2 + axis

    def control_index(self, j: int, axis: int) -> int:
        return self._control_offset + 2 * j + axis

    def time_index(self, stage: int) -> int:
        return self._time_offset + stage

    def stage_points(self, stage: int) -> range:
        """Grid state indices belonging to a stage (boundaries shared)."""
        return range(stage * self.grid_points, (stage + 1) * self.grid_points + 1)

    # Construction

    def _build_linear_inequalities(self) -> Tuple[np.ndarray, np.ndarray]:
        vehicle = self.scenario.vehicle
        rows: List[np.ndarray] = []
        offsets: List[float] = []

        def add(index: int, sign: float, bound: float) -> None:
            row = np.zeros(self._size)
            row[index] = sign
            rows.append(row)
            offsets.append(bound)

        for stage, box in enumerate(self.inflated):
            for i in self.stage_points(stage):
                for axis in (0, 1):
                    low, high = box.bounds(axis)
                    add(self.position_index(i, axis), 1.0, -low)
                    add(self.position_index(i, axis), -1.0, high)
        for i in range(self.n_states):
            for axis in (0, 1):
                add(self.velocity_index(i, axis), 1.0, vehicle.v_max)
                add(self.velocity_index(i, axis), -1.0, vehicle.v_max)
        for j in range(self.n_intervals):
            for axis in (0, 1):
                add(self.control_index(j, axis), 1.0, vehicle.a_max)
                add(self.control_index(j, axis), -1.0, vehicle.a_max)
        for stage in range(self.n_stages):
            add(self.time_index(stage), 1.0, -MIN_STAGE_DURATION)
        return np.vstack(rows), np.array(offsets)

    def _build_boundary(self) -> Tuple[np.ndarray, np.ndarray]:
        s = self.scenario
        last = self.n_states - 1
        indices = []
        values = []
        for axis in (0, 1):
            indices += [self.position_index(0, axis), self.velocity_index(0, axis)]
            values += [s.p0[axis], s.v0[axis]]
        for axis in (0, 1):
            indices += [self.position_index(last, axis), self.velocity_index(last, axis)]
            values += [s.pn[axis], 0.0]
        return np.array(indices), np.array(values, dtype=float)

    # Vectorized views

    def _unpack(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        states = z[:self._control_offset].reshape(self.n_states, 4)
        controls = z[self._control_offset:self._time_offset].reshape(self.n_intervals, 2)
        durations = z[self._time_offset:]
        h = durations[self._stage_of_interval] / self.grid_points
        return states, controls, durations, h

    # NlpProblem

    def objective(self, z: np.ndarray) -> float:
        return float(np.sum(z[self._time_offset:]))

    def objective_gradient(self, z: np.ndarray) -> np.ndarray:
        grad = np.zeros(self._size)
        grad[self._time_offset:] = 1.0
        return grad

    def equalities(self, z: np.ndarray) -> np.ndarray:
        """Boundary conditions, then per interval ``[cpx, cpy, cvx, cvy]``."""
        states, controls, _, h = self._unpack(z)
        p, v = states[:, :2], states[:, 2:]
        hh = h[:, None]
        defect_p = p[1:] - p[:-1] - v[:-1] * hh - 0.5 * controls * hh * hh
        defect_v = v[1:] - v[:-1] - controls * hh
        dynamics = np.hstack([defect_p, defect_v]).ravel()
        boundary = z[self._boundary_rows] - self._boundary_values
        return np.concatenate([boundary, dynamics])

    def equality_jacobian(self, z: np.ndarray) -> np.ndarray:
        states, controls, _, h = self._unpack(z)
        n_boundary = self._boundary_rows.size
        jac = np.zeros((n_boundary + 4 * self.n_intervals, self._size))
        jac[np.arange(n_boundary), self._boundary_rows] = 1.0
        inv_n = 1.0 / self.grid_points
        for j in range(self.n_intervals):
            t_index = self.time_index(int(self._stage_of_interval[j]))
            hj = h[j]
            for axis in (0, 1):
                v = states[j, 2 + axis]
                a = controls[j, axis]
                row_p = n_boundary + 4 * j + axis
                row_v = n_boundary + 4 * j + 2 + axis
                jac[row_p, self.position_index(j + 1, axis)] = 1.0
                jac[row_p, self.position_index(j, axis)] = -1.0
                jac[row_p, self.velocity_index(j, axis)] = -hj
                jac[row_p, self.control_index(j, axis)] = -0.5 * hj * hj
                jac[row_p, t_index] = (-v - a * hj) * inv_n
                jac[row_v, self.velocity_index(j + 1, axis)] = 1.0
                jac[row_v, self.velocity_index(j, axis)] = -1.0
                jac[row_v, self.control_index(j, axis)] = -hj
                jac[row_v, t_index] = -a * inv_n
        return jac

    def inequalities(self, z: np.ndarray) -> np.ndarray:
        return self._ineq_matrix @ z + self._ineq_offset

    def inequality_jacobian(self, z: np.ndarray) -> np.ndarray:
        return self._ineq_matrix

    def lagrangian_hessian(
        self,
        z: np.ndarray,
        lam_eq: np.ndarray,
        lam_in: np.ndarray
    ) -> np.ndarray:
        """Only the bilinear dynamics contribute curvature."""
        _, controls, _, h = self._unpack(z)
        n_boundary = self._boundary_rows.size
        inv_n = 1.0 / self.grid_points
        hessian = np.zeros((self._size, self._size))

        def add(i: int, k: int, value: float) -> None:
            hessian[i, k] += value
            if i != k:
                hessian[k, i] += value

        for j in range(self.n_intervals):
            t_index = self.time_index(int(self._stage_of_interval[j]))
            for axis in (0, 1):
                weight_p = -lam_eq[n_boundary + 4 * j + axis]
                weight_v = -lam_eq[n_boundary + 4 * j + 2 + axis]
                a_index = self.control_index(j, axis)
                # p defect: -v h - a h^2 / 2 with h = T / N
                add(self.velocity_index(j, axis), t_index, weight_p * -inv_n)
                add(a_index, t_index, weight_p * -h[j] * inv_n)
                add(t_index, t_index, weight_p * -controls[j, axis] * inv_n * inv_n)
                # v defect: -a h
                add(a_index, t_index, weight_v * -inv_n)
        return hessian

    # Guess and interpretation

    def initial_guess(self) -> np.ndarray:
        """
        Straight segments through the shrunken overlap centers, travelled at
        constant velocity with half the velocity bound.
        """
        scenario = self.scenario
        vehicle = scenario.vehicle
        anchors: List[Vec2] = [scenario.p0]
        anchors += [box.center() for box in self.sequence.shrunken_overlaps(vehicle)]
        anchors.append(scenario.pn)

        z = np.zeros(self._size)
        speed = GUESS_SPEED_FRACTION * vehicle.v_max
        for stage in range(self.n_stages):
            start = np.array(anchors[stage])
            end = np.array(anchors[stage + 1])
            duration = max(MIN_STAGE_DURATION, float(np.max(np.abs(end - start))) / speed)
            z[self.time_index(stage)] = duration
            velocity = (end - start) / duration
            for local, i in enumerate(self.stage_points(stage)):
                point = start + (end - start) * local / self.grid_points
                for axis in (0, 1):
                    z[self.position_index(i, axis)] = point[axis]
                    z[self.velocity_index(i, axis)] = velocity[axis]
        return z

    def trajectory(self, z: np.ndarray) -> Trajectory:
        """Piecewise-constant-acceleration trajectory, one piece per interval."""
        states, controls, _, h = self._unpack(z)
        a_max = self.scenario.vehicle.a_max
        pieces = []
        start = 0.0
        for j in range(self.n_intervals):
            duration = max(0.0, float(h[j]))
            axes = [
                Primitive1D(
                    alpha_start=float(controls[j, axis]) / a_max,
                    alpha_end=0.0,
                    p_start=float(states[j, axis]),
                    v_start=float(states[j, 2 + axis]),
                    tau=(duration, 0.0, 0.0),
                    a_max=a_max,
                )
                for axis in (0, 1)
            ]
            pieces.append(TrajectoryPiece(start, Primitive2D(axes[0], axes[1])))
            start += duration
        return Trajectory(pieces)

    def grid_states(self, z: np.ndarray) -> np.ndarray:
        return z[:self._control_offset].reshape(self.n_states, 4).copy()

    def t_move(self, z: np.ndarray) -> float:
        return float(np.sum(z[self._time_offset:]))


def solve_baseline(
    sequence: CorridorSequence,
    scenario: Scenario,
    grid_points: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None
) -> PlanResult:
    """
    Solve the transcription baseline through ``sequence``.

    Always uses the exact Hessian. Solver failures are reported through the
    returned report's status.

    Returns:
        Plan result with the trajectory, the problem and its solution
    """
    config = dict(config or get_config())
    config["nlp_hessian"] = "exact"
    grid_points = grid_points or int(config.get("baseline_grid_points", 30))
    started = time.monotonic()

    report = PlanReport(n_corridors=len(sequence))
    result = PlanResult(report=report, sequence=sequence)
    problem = TranscribedOcp(sequence, scenario, grid_points)
    result.problem = problem
    try:
        solution, stats = solve(problem, problem.initial_guess(), config)
    except SolverFailure as e:
        if e.stats is not None:
            report.t_solver = e.stats.wall_time
            report.solver_iterations = e.stats.iterations
        report.status = PlanStatus.SOLVER_FAILURE
        report.message = str(e)
        report.t_total = time.monotonic() - started
        logger.warning(f"Baseline with {grid_points} points per stage failed: {e}")
        return result

    result.solution = solution
    result.trajectory = problem.trajectory(solution)
    report.status = PlanStatus.SOLVED
    report.t_solver = stats.wall_time
    report.solver_iterations = stats.iterations
    report.t_move = report.t_move_initial = problem.t_move(solution)
    report.t_total = time.monotonic() - started
    logger.info(
        f"Baseline ({grid_points} points per stage) t_move={report.t_move:.6f}s "
        f"in {stats.iterations} iterations"
    )
    return result


def intersample_violation_count(
    trajectory: Trajectory,
    sequence: CorridorSequence,
    vehicle: Vehicle,
    rate: float = 100.0
) -> int:
    """Number of uniform samples lying outside every inflated corridor."""
    samples = trajectory.sample(rate)
    inside = inside_union(samples.p, sequence.inflated_boxes(vehicle), GEOMETRY_TOLERANCE)
    return int(np.count_nonzero(~inside))
