"""
Feasibility Module

Checks sampled trajectories against corridors, obstacles and the vehicle
bounds, and the braking test used by fallback stopping.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
from dataclasses_json import dataclass_json

from core.constants import FEASIBILITY_TOLERANCE
from core.exceptions import OutOfBounds
from core.geometry import Box, Vec2
from corridors.models import Corridor, CorridorSequence
from kinematics.trajectory import Trajectory, TrajectorySamples
from world.models import OccupancyGrid, Scenario, Vehicle, occupied_cells

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass
class FeasibilityReport:
    """
    Attributes:
        samples_checked: Number of evaluated time points
        violating_samples: Points outside every inflated corridor
        extremum_violations: Extreme points outside every inflated corridor
        velocity_violations: Points with |v|inf above v_max
        acceleration_violations: Points with |a|inf above a_max
        max_speed: Largest |v|inf seen
        max_acceleration: Largest |a|inf seen
        first_violation_time: Time of the first violating point, if any
    """
    samples_checked: int = 0
    violating_samples: int = 0
    extremum_violations: int = 0
    velocity_violations: int = 0
    acceleration_violations: int = 0
    max_speed: float = 0.0
    max_acceleration: float = 0.0
    first_violation_time: Optional[float] = None

    @property
    def feasible(self) -> bool:
        return (
            self.violating_samples == 0
            and self.extremum_violations == 0
            and self.velocity_violations == 0
            and self.acceleration_violations == 0
        )


def inside_union(points: np.ndarray, boxes: Sequence[Box], tol: float) -> np.ndarray:
    """Boolean mask of the rows of ``points`` (N, 2) lying in any box."""
    if not boxes:
        return np.zeros(points.shape[0], dtype=bool)
    bounds = np.array([[b.x_min, b.x_max, b.y_min, b.y_max] for b in boxes])
    x = points[:, 0:1]
    y = points[:, 1:2]
    inside = (
        (x >= bounds[:, 0] - tol) & (x <= bounds[:, 1] + tol)
        & (y >= bounds[:, 2] - tol) & (y <= bounds[:, 3] + tol)
    )
    return inside.any(axis=1)


def check_trajectory(
    trajectory: Trajectory,
    sequence: CorridorSequence,
    vehicle: Vehicle,
    rate: float = 100.0,
    tol: float = FEASIBILITY_TOLERANCE
) -> FeasibilityReport:
    """
    Check a trajectory at uniform samples plus every extremum time.

    Args:
        trajectory: Trajectory to check
        sequence: Corridors whose inflated union must contain the center
        vehicle: Vehicle model (bounds and footprint)
        rate: Sampling rate (Hz)
        tol: Absolute tolerance on positions, velocities and accelerations

    Returns:
        Feasibility report
    """
    boxes = sequence.inflated_boxes(vehicle)
    extrema = trajectory.extreme_points()
    extremum_times = np.array(
        [trajectory.pieces[piece].start_time + point.time for piece, _, point in extrema],
        dtype=float,
    )
    times = np.concatenate([trajectory.sample_times(rate), extremum_times])
    order = np.argsort(times, kind="stable")
    samples = trajectory.evaluate(times[order])

    outside = ~inside_union(samples.p, boxes, tol)
    speed = np.max(np.abs(samples.v), axis=1)
    accel = np.max(np.abs(samples.a), axis=1)
    too_fast = speed > vehicle.v_max + tol
    too_hard = accel > vehicle.a_max + tol

    extremum_outside = 0
    for piece, axis, point in extrema:
        p, _, _ = trajectory.pieces[piece].primitive.state_at(point.time)
        if not inside_union(np.array([p]), boxes, tol)[0]:
            extremum_outside += 1

    bad = outside | too_fast | too_hard
    report = FeasibilityReport(
        samples_checked=int(times.size),
        violating_samples=int(np.count_nonzero(outside)),
        extremum_violations=extremum_outside,
        velocity_violations=int(np.count_nonzero(too_fast)),
        acceleration_violations=int(np.count_nonzero(too_hard)),
        max_speed=float(speed.max(initial=0.0)),
        max_acceleration=float(accel.max(initial=0.0)),
        first_violation_time=float(samples.t[np.argmax(bad)]) if bad.any() else None,
    )
    if not report.feasible:
        logger.debug(f"Trajectory check failed: {report.to_json()}")
    return report


def collision_rows(
    samples: TrajectorySamples,
    grid: OccupancyGrid,
    vehicle: Vehicle,
    tol: float = FEASIBILITY_TOLERANCE
) -> List[int]:
    """
    Indices of samples whose footprint leaves the grid or overlaps an obstacle.

    The footprint is shrunk by ``tol`` on every side before the test.
    """
    if tol > 0:
        vehicle = replace(vehicle, width=vehicle.width - 2.0 * tol, length=vehicle.length - 2.0 * tol)
    rows = []
    for index in range(len(samples)):
        point = (float(samples.p[index, 0]), float(samples.p[index, 1]))
        try:
            cells = occupied_cells(point, vehicle, grid)
        except OutOfBounds:
            rows.append(index)
            continue
        if any(not grid.is_free(cell) for cell in cells):
            rows.append(index)
    return rows


def emergency_feasibility_note(
    scenario: Scenario,
    corridor: Corridor,
    position: Optional[Vec2] = None,
    velocity: Optional[Vec2] = None
) -> bool:
    """
    Return True when full braking on each axis stops the vehicle inside the
    inflated ``corridor``.

    Position and velocity default to the scenario's start state.
    """
    vehicle = scenario.vehicle
    position = scenario.p0 if position is None else position
    velocity = scenario.v0 if velocity is None else velocity
    box = corridor.inflated(vehicle)
    for axis in (0, 1):
        v = velocity[axis]
        if v == 0.0:
            continue
        low, high = box.bounds(axis)
        margin = high - position[axis] if v > 0 else position[axis] - low
        braking = v * v / (2.0 * vehicle.a_max)
        if braking > margin + 1e-12:
            logger.debug(
                f"Braking distance {braking:.6f} m exceeds margin {margin:.6f} m on axis {'xy'[axis]}"
            )
            return False
    return True


@dataclass_json
@dataclass
class CheckVerdict:
    """
    Outcome of one check over a list of samples.

    Attributes:
        name: Check name ("collision", "bounds" or "continuity")
        passed: True when no sample failed
        failures: Number of failing samples
        first_row: 0-based index of the first failing sample
        first_time: Time of the first failing sample
    """
    name: str
    passed: bool
    failures: int = 0
    first_row: Optional[int] = None
    first_time: Optional[float] = None

    def describe(self) -> str:
        if self.passed:
            return f"{self.name}: PASS"
        return (
            f"{self.name}: FAIL ({self.failures} samples, first at row {self.first_row}, "
            f"t={self.first_time!r})"
        )


def bound_rows(samples: TrajectorySamples, vehicle: Vehicle, tol: float) -> List[int]:
    """Indices of samples with |v|inf above v_max or |a|inf above a_max."""
    speed = np.max(np.abs(samples.v), axis=1)
    accel = np.max(np.abs(samples.a), axis=1)
    bad = (speed > vehicle.v_max + tol) | (accel > vehicle.a_max + tol)
    return [int(i) for i in np.flatnonzero(bad)]


def continuity_rows(samples: TrajectorySamples, vehicle: Vehicle, tol: float) -> List[int]:
    """
    Indices of samples that cannot follow their predecessor.

    Between two samples ``dt`` apart any admissible motion satisfies
    ``|dv| <= a_max dt`` and ``|dp - v dt| <= a_max dt^2 / 2`` per axis;
    time must not decrease.
    """
    dt = np.diff(samples.t)
    dp = np.diff(samples.p, axis=0)
    dv = np.diff(samples.v, axis=0)
    drift = dp - samples.v[:-1] * dt[:, None]
    a_max = vehicle.a_max
    bad = (
        (dt < -tol)
        | np.any(np.abs(dv) > a_max * np.abs(dt)[:, None] + tol, axis=1)
        | np.any(np.abs(drift) > 0.5 * a_max * (dt * dt)[:, None] + tol, axis=1)
    )
    return [int(i) + 1 for i in np.flatnonzero(bad)]


def _verdict(name: str, rows: List[int], samples: TrajectorySamples) -> CheckVerdict:
    if not rows:
        return CheckVerdict(name=name, passed=True)
    return CheckVerdict(
        name=name,
        passed=False,
        failures=len(rows),
        first_row=rows[0],
        first_time=float(samples.t[rows[0]]),
    )


def validate_samples(
    samples: TrajectorySamples,
    grid: OccupancyGrid,
    vehicle: Vehicle,
    tol: float = FEASIBILITY_TOLERANCE
) -> List[CheckVerdict]:
    """Run the collision, bound and continuity checks on sampled states."""
    verdicts = [
        _verdict("collision", collision_rows(samples, grid, vehicle, tol), samples),
        _verdict("bounds", bound_rows(samples, vehicle, tol), samples),
        _verdict("continuity", continuity_rows(samples, vehicle, tol), samples),
    ]
    for verdict in verdicts:
        if not verdict.passed:
            logger.info(verdict.describe())
    return verdicts
