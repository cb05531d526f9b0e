"""
Primitive Selection Module

Chooses the waypoints and acceleration signs of the primitive chain from
the corridor geometry:

- each interior waypoint is the corner of the shrunken overlap closest to
  the inside of the turn,
- signs point away from the overlap center at interior waypoints and along
  the first and last segments at the endpoints,
- a waypoint the vehicle could pass on a straight line is released
  (movable within its overlap) and its sign is flipped,
- the faster axis of the first and last segments is marked free.
"""

import copy
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from config.config_manager import get_config
from core.constants import DEFAULT_MU
from core.exceptions import EmptyCandidates
from core.geometry import GEOMETRY_TOLERANCE, Box, Vec2, union_contains, vec2
from corridors.models import CorridorSequence
from kinematics.min_time import min_time_1d
from world.models import Scenario, Vehicle

logger = logging.getLogger(__name__)

# Upper bound on the inside-of-turn scale before giving up on doubling it
_MAX_MU: float = 1e12


@dataclass_json
@dataclass
class PrimitiveSelection:
    """
    Waypoints and signs of the primitive chain.

    Attributes:
        waypoints: p_0 .. p_n (meters)
        signs: alpha_0 .. alpha_n, per-axis values in {-1, +1}
        movable: Per waypoint, True when released by the straight-line test
        delta_bounds: Per waypoint, admissible offset box for movable waypoints
        free_start_axis: Axis whose initial acceleration is optimized (0=x, 1=y)
        free_end_axis: Axis whose final acceleration is optimized
        mu: Inside-of-turn scale actually used
    """
    waypoints: List[Vec2]
    signs: List[Vec2]
    movable: List[bool] = field(default_factory=list)
    delta_bounds: List[Optional[Box]] = field(default_factory=list)
    free_start_axis: int = 0
    free_end_axis: int = 0
    mu: float = DEFAULT_MU

    def __post_init__(self) -> None:
        count = len(self.waypoints)
        if not self.movable:
            self.movable = [False] * count
        if not self.delta_bounds:
            self.delta_bounds = [None] * count

    @property
    def n_primitives(self) -> int:
        return len(self.waypoints) - 1

    def movable_indices(self) -> List[int]:
        return [k for k, flag in enumerate(self.movable) if flag]


def candidate_waypoints(
    overlap: Box,
    adjacent: Sequence[Box],
    half_extent: Vec2
) -> List[Vec2]:
    """
    Corners of the shrunken overlap that the waypoint may be chosen from.

    A corner is dropped when it lies further than the half extents from
    every edge of one of the adjacent corridors (deep inside that corridor).
    If that drops every corner, all corners are kept.

    Args:
        overlap: Overlap of the two corridors
        adjacent: The two corridors sharing the overlap
        half_extent: Vehicle half extents (W/2, L/2)

    Returns:
        Candidates in corner order (-x-y, +x-y, -x+y, +x+y)
    """
    corners = overlap.shrink(half_extent[0], half_extent[1]).corners()
    try:
        return _filter_candidates(corners, adjacent, half_extent)
    except EmptyCandidates as e:
        logger.warning(f"{e}; keeping all {len(corners)} corners")
        return corners


def _filter_candidates(
    corners: List[Vec2],
    adjacent: Sequence[Box],
    half_extent: Vec2
) -> List[Vec2]:
    half_x, half_y = half_extent
    kept = []
    for q in corners:
        deep = any(
            min(q[0] - box.x_min, box.x_max - q[0]) > half_x + GEOMETRY_TOLERANCE
            and min(q[1] - box.y_min, box.y_max - q[1]) > half_y + GEOMETRY_TOLERANCE
            for box in adjacent
        )
        if not deep:
            kept.append(q)
    if not kept:
        raise EmptyCandidates(f"Robustness filter removed all candidates {corners}")
    return kept


def select_waypoints(
    sequence: CorridorSequence,
    scenario: Scenario,
    mu: float = DEFAULT_MU
) -> List[Vec2]:
    """
    Choose the interior waypoints p_1 .. p_{n-1}.

    Each waypoint is the candidate closest to ``center(O) + mu * v``, where
    ``v`` is the unit normal of the line from the previous waypoint to the
    next overlap center (the goal for the last one), oriented from the
    overlap center toward that line. ``mu`` is doubled until that point lies
    outside the overlap.

    Args:
        sequence: Corridor sequence with at least two corridors
        scenario: Planning scenario
        mu: Inside-of-turn scale

    Returns:
        Interior waypoints in order
    """
    vehicle = scenario.vehicle
    overlaps = sequence.overlaps()
    boxes = sequence.boxes()
    n = len(sequence)
    waypoints: List[Vec2] = []
    previous = scenario.p0

    for k in range(1, n):
        overlap = overlaps[k - 1]
        candidates = candidate_waypoints(
            overlap, (boxes[k - 1], boxes[k]), vehicle.half_extent
        )
        center = np.array(overlap.center())
        target = np.array(overlaps[k].center() if k < n - 1 else scenario.pn)
        start = np.array(previous)

        direction = target - start
        length = float(np.linalg.norm(direction))
        normal = None
        if length > GEOMETRY_TOLERANCE:
            normal = np.array([-direction[1], direction[0]]) / length
            offset = float(np.dot(center - start, normal))
            if abs(offset) <= GEOMETRY_TOLERANCE:
                normal = None
            else:
                normal = -math.copysign(1.0, offset) * normal

        if normal is None:
            # No turn: stay as close to the overlap center as possible
            chosen = _nearest(candidates, center)
        else:
            scale = mu
            inside = center + scale * normal
            while overlap.contains(tuple(inside)) and scale < _MAX_MU:
                scale *= 2.0
                inside = center + scale * normal
                logger.warning(
                    f"Inside-of-turn point for waypoint {k} lies in its overlap; "
                    f"doubling mu to {scale}"
                )
            chosen = _nearest(candidates, inside)

        waypoints.append(vec2(*chosen))
        previous = waypoints[-1]

    return waypoints


def _nearest(candidates: List[Vec2], point: np.ndarray) -> Vec2:
    """Closest candidate; ties keep the lowest index."""
    best = candidates[0]
    best_distance = float(np.linalg.norm(np.array(best) - point))
    for candidate in candidates[1:]:
        distance = float(np.linalg.norm(np.array(candidate) - point))
        if distance < best_distance:
            best, best_distance = candidate, distance
    return best


def _sign(value: float) -> float:
    return 1.0 if value >= 0.0 else -1.0


def _sign_vec(delta: Sequence[float]) -> Vec2:
    return (_sign(delta[0]), _sign(delta[1]))


def select_signs(waypoints: List[Vec2], sequence: CorridorSequence) -> List[Vec2]:
    """
    Acceleration signs alpha_0 .. alpha_n for waypoints p_0 .. p_n.

    alpha_0 follows the first segment, alpha_n opposes the last segment and
    interior signs point from the overlap center to the waypoint. Zero
    components resolve to +1.
    """
    n = len(waypoints) - 1
    overlaps = sequence.overlaps()
    signs: List[Vec2] = []
    for k, point in enumerate(waypoints):
        if k == 0:
            nxt = waypoints[1]
            signs.append(_sign_vec((nxt[0] - point[0], nxt[1] - point[1])))
        elif k == n:
            prev = waypoints[n - 1]
            signs.append(_sign_vec((prev[0] - point[0], prev[1] - point[1])))
        else:
            center = overlaps[k - 1].center()
            signs.append(_sign_vec((point[0] - center[0], point[1] - center[1])))
    return signs


def straight_line_clear(
    start: Vec2,
    end: Vec2,
    boxes: List[Box],
    vehicle: Vehicle,
    samples: int
) -> bool:
    """
    Return True if the footprint swept from ``start`` to ``end`` stays in the
    union of ``boxes`` (checked at ``samples`` points, all four corners each).
    """
    half_x, half_y = vehicle.half_extent
    for s in np.linspace(0.0, 1.0, samples):
        cx = start[0] + s * (end[0] - start[0])
        cy = start[1] + s * (end[1] - start[1])
        for dx in (-half_x, half_x):
            for dy in (-half_y, half_y):
                if not union_contains(boxes, (cx + dx, cy + dy)):
                    return False
    return True


def straight_line_modification(
    selection: PrimitiveSelection,
    sequence: CorridorSequence,
    vehicle: Vehicle,
    samples: int = 200
) -> PrimitiveSelection:
    """
    Release waypoints that a straight line passes and flip their signs.

    For each interior waypoint p_k, if the swept footprint from p_{k-1} to
    p_{k+1} stays inside the corridors, alpha_k is negated and p_k may move
    within the shrunken overlap (offset bounds relative to p_k).

    Returns:
        Modified copy of ``selection``
    """
    result = copy.deepcopy(selection)
    boxes = sequence.boxes()
    shrunken = sequence.shrunken_overlaps(vehicle)
    for k in range(1, result.n_primitives):
        if not straight_line_clear(
            result.waypoints[k - 1], result.waypoints[k + 1], boxes, vehicle, samples
        ):
            continue
        alpha = result.signs[k]
        result.signs[k] = (-alpha[0], -alpha[1])
        result.movable[k] = True
        px, py = result.waypoints[k]
        result.delta_bounds[k] = shrunken[k - 1].translate(-px, -py)
        logger.info(f"Straight line passes waypoint {k}; flipped its sign and released it")
    return result


def free_axes(waypoints: List[Vec2], scenario: Scenario) -> Tuple[int, int]:
    """
    Free axes of the first and last segments.

    The axis whose decoupled time-optimal motion finishes first is free;
    ties pick x.

    Returns:
        ``(free_start_axis, free_end_axis)``
    """
    vehicle = scenario.vehicle

    def faster_axis(start: Vec2, end: Vec2, velocity: Vec2) -> int:
        times = [
            min_time_1d(start[j], end[j], velocity[j], vehicle.v_max, vehicle.a_max).duration
            for j in (0, 1)
        ]
        return 0 if times[0] <= times[1] else 1

    first = faster_axis(waypoints[0], waypoints[1], scenario.v0)
    last = faster_axis(waypoints[-2], waypoints[-1], (0.0, 0.0))
    return (first, last)


def flip_sign(selection: PrimitiveSelection, k: int) -> PrimitiveSelection:
    """Return a copy of ``selection`` with alpha_k negated."""
    result = copy.deepcopy(selection)
    alpha = result.signs[k]
    result.signs[k] = (-alpha[0], -alpha[1])
    return result


def select_primitives(
    sequence: CorridorSequence,
    scenario: Scenario,
    config: Optional[Dict[str, Any]] = None
) -> PrimitiveSelection:
    """
    Run waypoint selection, sign selection, the straight-line modification
    and the free-axis designation.

    Args:
        sequence: Validated corridor sequence
        scenario: Planning scenario
        config: Configuration (defaults to ``get_config()``)

    Returns:
        Complete primitive selection
    """
    config = config or get_config()
    mu = float(config.get("mu", DEFAULT_MU))
    interior = select_waypoints(sequence, scenario, mu) if len(sequence) > 1 else []
    waypoints = [vec2(*scenario.p0)] + interior + [vec2(*scenario.pn)]
    signs = select_signs(waypoints, sequence)
    selection = PrimitiveSelection(waypoints=waypoints, signs=signs, mu=mu)
    selection = straight_line_modification(
        selection, sequence, scenario.vehicle,
        int(config.get("straight_line_samples", 200))
    )
    selection.free_start_axis, selection.free_end_axis = free_axes(waypoints, scenario)
    logger.info(
        f"Selected {len(waypoints)} waypoints, {len(selection.movable_indices())} "
        f"movable, free axes start={'xy'[selection.free_start_axis]} "
        f"end={'xy'[selection.free_end_axis]}"
    )
    return selection
