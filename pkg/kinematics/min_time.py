"""
Minimum Time Module

Closed-form time-optimal rest-to-rest (or moving-to-rest) motion of a
bounded double integrator, per axis and decoupled in the plane.
"""

import logging
import math
from typing import List, Tuple

from core.constants import TIME_MATCH_TOLERANCE
from kinematics.primitives import Primitive1D, Primitive2D
from kinematics.trajectory import Trajectory, TrajectoryPiece
from world.models import Scenario

logger = logging.getLogger(__name__)


def min_time_1d(
    p0: float,
    pf: float,
    v0: float,
    v_max: float,
    a_max: float
) -> Primitive1D:
    """
    Time-optimal profile from ``(p0, v0)`` to ``(pf, 0)``.

    The profile first accelerates with sign ``s``, optionally coasts at
    ``s * v_max`` and then brakes with ``-s``. ``s`` is positive when the
    target lies at or beyond the stopping point reached by braking at once,
    which also covers the overshoot-and-return cases.

    Args:
        p0: Initial position (meters)
        pf: Final position (meters)
        v0: Initial velocity, ``|v0| <= v_max`` (meters/second)
        v_max: Velocity bound (meters/second)
        a_max: Acceleration bound (meters/second^2)

    Returns:
        Time-optimal primitive
    """
    d = pf - p0
    if d == 0.0 and v0 == 0.0:
        return Primitive1D(1.0, -1.0, p0, v0, (0.0, 0.0, 0.0), a_max)

    d_stop = v0 * abs(v0) / (2.0 * a_max)
    sign = 1.0 if d >= d_stop else -1.0

    # Solve the mirrored problem with a positive first acceleration
    dist = sign * d
    vel = min(sign * v0, v_max)
    peak = math.sqrt(max(0.0, (2.0 * a_max * dist + vel * vel) / 2.0))
    coast = 0.0
    if peak > v_max:
        peak = v_max
        coast = (dist - (2.0 * peak * peak - vel * vel) / (2.0 * a_max)) / peak
    accelerate = max(0.0, (peak - vel) / a_max)
    brake = peak / a_max
    return Primitive1D(
        alpha_start=sign,
        alpha_end=-sign,
        p_start=p0,
        v_start=v0,
        tau=(accelerate, max(0.0, coast), brake),
        a_max=a_max,
    )


def axis_min_times(scenario: Scenario) -> Tuple[Primitive1D, Primitive1D]:
    """Per-axis time-optimal profiles for the scenario endpoints."""
    vehicle = scenario.vehicle
    return (
        min_time_1d(scenario.p0[0], scenario.pn[0], scenario.v0[0], vehicle.v_max, vehicle.a_max),
        min_time_1d(scenario.p0[1], scenario.pn[1], scenario.v0[1], vehicle.v_max, vehicle.a_max),
    )


def analytic_plan_2d(scenario: Scenario) -> Trajectory:
    """
    Decoupled time-optimal trajectory ignoring obstacles.

    Each axis follows its own ``min_time_1d`` profile; the axis that
    finishes first then holds still with zero acceleration until the slower
    axis arrives. The result has one piece up to the faster axis' arrival
    and a second piece for the remainder (omitted when both axes arrive
    together).

    Args:
        scenario: Planning scenario

    Returns:
        Trajectory with ``t_move = max(T_x, T_y)``
    """
    x_prim, y_prim = axis_min_times(scenario)
    t_x, t_y = x_prim.duration, y_prim.duration
    t_fast = min(t_x, t_y)
    gap = abs(t_x - t_y)
    logger.debug(f"Decoupled axis times: T_x={t_x:.6f}s, T_y={t_y:.6f}s")

    if gap <= TIME_MATCH_TOLERANCE:
        return Trajectory([TrajectoryPiece(0.0, Primitive2D(x_prim, y_prim))])

    slow_head, slow_tail = (x_prim if t_x > t_y else y_prim).split(t_fast)
    fast = y_prim if t_x > t_y else x_prim
    fast_end, _ = fast.end_state()
    hold = Primitive1D(fast.alpha_start, fast.alpha_end, fast_end, 0.0, (0.0, gap, 0.0), fast.a_max)

    pieces: List[TrajectoryPiece] = []
    if t_x > t_y:
        if t_fast > 0.0:
            pieces.append(TrajectoryPiece(0.0, Primitive2D(slow_head, fast)))
        pieces.append(TrajectoryPiece(t_fast, Primitive2D(slow_tail, hold)))
    else:
        if t_fast > 0.0:
            pieces.append(TrajectoryPiece(0.0, Primitive2D(fast, slow_head)))
        pieces.append(TrajectoryPiece(t_fast, Primitive2D(hold, slow_tail)))
    return Trajectory(pieces)
