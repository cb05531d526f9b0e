"""
Corridor Builder Module

Builds the corridor sequence for a scenario:

1. breadth-first search for a shortest 4-connected cell path,
2. extension of that path with the cells covered by the start and goal
   footprints,
3. splitting into row and column runs (consecutive runs share their turn
   cell),
4. iterative growing, one cell row or column per side and pass, with
   pruning after every pass until nothing changes.
"""

import logging
from collections import deque
from typing import Dict, List, Optional, Tuple

from core.constants import NEIGHBOR_ORDER
from core.exceptions import DegenerateSequence, NoPath
from core.geometry import GEOMETRY_TOLERANCE, Box
from corridors.models import CellRange, Corridor, CorridorSequence
from world.models import (
    Cell,
    OccupancyGrid,
    Scenario,
    Vehicle,
    footprint,
    ordered_occupied_cells,
)

logger = logging.getLogger(__name__)

# Growing side order: -x, +x, -y, +y
_SIDES: Tuple[str, ...] = ("-x", "+x", "-y", "+y")


def shortest_cell_path(
    grid: OccupancyGrid,
    start_cell: Cell,
    goal_cell: Cell
) -> List[Cell]:
    """
    Breadth-first search over free cells with a fixed neighbour order.

    Args:
        grid: Occupancy grid
        start_cell: First cell of the path
        goal_cell: Last cell of the path

    Returns:
        Minimal-length 4-connected list of free cells from start to goal

    Raises:
        NoPath: If the goal is unreachable or an endpoint cell is blocked.
    """
    if not grid.is_free(start_cell) or not grid.is_free(goal_cell):
        raise NoPath(f"Endpoint cell blocked: start={start_cell} goal={goal_cell}")

    parents: Dict[Cell, Optional[Cell]] = {start_cell: None}
    queue = deque([start_cell])
    while queue:
        cell = queue.popleft()
        if cell == goal_cell:
            break
        for d_row, d_col in NEIGHBOR_ORDER:
            neighbor = (cell[0] + d_row, cell[1] + d_col)
            if neighbor not in parents and grid.is_free(neighbor):
                parents[neighbor] = cell
                queue.append(neighbor)

    if goal_cell not in parents:
        raise NoPath(f"Goal cell {goal_cell} unreachable from {start_cell}")

    path = [goal_cell]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    path.reverse()
    logger.debug(f"Shortest cell path has {len(path)} cells")
    return path


def extend_path(path: List[Cell], scenario: Scenario) -> List[Cell]:
    """
    Prepend the start footprint cells and append the goal footprint cells.

    The footprint cells are ordered so the extended path stays 4-connected;
    adjacent repeats are removed.

    Args:
        path: Non-empty BFS cell path
        scenario: Planning scenario

    Returns:
        Extended cell path
    """
    head = ordered_occupied_cells(scenario.p0, scenario.vehicle, scenario.grid, path[0])
    tail = ordered_occupied_cells(scenario.pn, scenario.vehicle, scenario.grid, path[-1])
    extended: List[Cell] = []
    for cell in head + path + list(reversed(tail)):
        if not extended or extended[-1] != cell:
            extended.append(cell)
    return extended


def split_runs(path: List[Cell]) -> List[List[Cell]]:
    """
    Split a 4-connected path into maximal runs on a single row or column.

    Consecutive runs share the cell where the path turns.
    """
    if len(path) <= 1:
        return [list(path)]

    runs: List[List[Cell]] = []
    current = [path[0], path[1]]
    horizontal = path[0][0] == path[1][0]
    for cell in path[2:]:
        previous = current[-1]
        same_line = cell[0] == previous[0] if horizontal else cell[1] == previous[1]
        if same_line:
            current.append(cell)
            continue
        runs.append(current)
        current = [previous, cell]
        horizontal = previous[0] == cell[0]
    runs.append(current)
    return runs


def build_corridors(
    path: List[Cell],
    grid: OccupancyGrid,
    vehicle: Vehicle
) -> CorridorSequence:
    """
    Turn an extended cell path into a grown and pruned corridor sequence.

    Args:
        path: Extended cell path
        grid: Occupancy grid
        vehicle: Vehicle model

    Returns:
        Corridor sequence at the growing fixed point

    Raises:
        DegenerateSequence: If the path is empty.
    """
    if not path:
        raise DegenerateSequence("Cannot build corridors from an empty path")

    ranges = [CellRange.from_cells(run) for run in split_runs(path)]
    logger.debug(f"Split extended path of {len(path)} cells into {len(ranges)} runs")

    ranges = _prune(ranges, grid, vehicle)
    max_passes = grid.rows + grid.cols + 1
    passes = 0
    while passes < max_passes:
        passes += 1
        grown = [_grow_once(r, grid) for r in ranges]
        changed = grown != ranges
        ranges = _prune(grown, grid, vehicle)
        if not changed:
            break
    else:
        logger.warning(f"Corridor growing stopped at the pass cap ({max_passes})")

    if not ranges:
        raise DegenerateSequence("Pruning removed every corridor")

    sequence = CorridorSequence([Corridor.from_cells(r, grid) for r in ranges])
    logger.info(
        f"Built {len(sequence)} corridors from {len(path)} path cells "
        f"in {passes} growing passes"
    )
    return sequence


def build_corridor_sequence(scenario: Scenario) -> CorridorSequence:
    """
    Run search, extension, corridor building and validation for a scenario.

    Raises:
        NoPath: If the goal cannot be reached.
        DegenerateSequence: If the result violates a sequence invariant.
    """
    grid = scenario.grid
    path = shortest_cell_path(grid, grid.cell_of(scenario.p0), grid.cell_of(scenario.pn))
    sequence = build_corridors(extend_path(path, scenario), grid, scenario.vehicle)
    validate_sequence(sequence, scenario)
    return sequence


def validate_sequence(sequence: CorridorSequence, scenario: Scenario) -> None:
    """
    Check every corridor sequence invariant.

    Non-consecutive corridors may touch along an edge but must not share
    positive area.

    Raises:
        DegenerateSequence: Naming the first violated invariant.
    """
    if len(sequence) == 0:
        raise DegenerateSequence("Empty corridor sequence")

    grid = scenario.grid
    vehicle = scenario.vehicle
    for index, corridor in enumerate(sequence.corridors):
        box = corridor.box
        if box.width <= 0 or box.height <= 0:
            raise DegenerateSequence(f"Corridor {index} has no area: {box}")
        if box.width + GEOMETRY_TOLERANCE < vehicle.width or (
            box.height + GEOMETRY_TOLERANCE < vehicle.length
        ):
            raise DegenerateSequence(f"Corridor {index} is narrower than the vehicle")
        if corridor.cells is not None:
            blocked = [c for c in corridor.cells.cells() if not grid.is_free(c)]
            if blocked:
                raise DegenerateSequence(
                    f"Corridor {index} covers occupied cells {blocked}"
                )

    for index, shrunken in enumerate(sequence.shrunken_overlaps(vehicle)):
        if shrunken.is_empty():
            raise DegenerateSequence(
                f"Overlap of corridors {index} and {index + 1} cannot hold the vehicle"
            )

    boxes = sequence.boxes()
    for i in range(len(boxes)):
        for j in range(i + 2, len(boxes)):
            if boxes[i].overlaps_with_area(boxes[j]):
                raise DegenerateSequence(
                    f"Non-consecutive corridors {i} and {j} overlap"
                )

    if not boxes[0].contains_box(footprint(scenario.p0, vehicle)):
        raise DegenerateSequence("Start footprint is not inside the first corridor")
    if not boxes[-1].contains_box(footprint(scenario.pn, vehicle)):
        raise DegenerateSequence("Goal footprint is not inside the last corridor")


def prune_boxes(boxes: List[Box], vehicle: Vehicle) -> List[int]:
    """
    Return the indices of ``boxes`` kept by pruning.

    A corridor strictly between two corridors that overlap with positive
    area (and can pass the vehicle between them) is removed, and so is an
    end corridor covered by its only neighbour. The scan runs in increasing
    order and restarts after every removal.
    """
    kept = list(range(len(boxes)))
    restart = True
    while restart:
        restart = False
        for a in range(len(kept)):
            for b in range(a + 2, len(kept)):
                first, second = boxes[kept[a]], boxes[kept[b]]
                if _joinable(first, second, vehicle):
                    logger.debug(
                        f"Pruning corridors {kept[a + 1:b]} between "
                        f"{kept[a]} and {kept[b]}"
                    )
                    del kept[a + 1:b]
                    restart = True
                    break
            if restart:
                break
        if restart or len(kept) < 2:
            continue
        if boxes[kept[1]].contains_box(boxes[kept[0]]):
            logger.debug(f"Pruning start corridor {kept[0]}")
            del kept[0]
            restart = True
        elif boxes[kept[-2]].contains_box(boxes[kept[-1]]):
            logger.debug(f"Pruning goal corridor {kept[-1]}")
            del kept[-1]
            restart = True
    return kept


def _joinable(first: Box, second: Box, vehicle: Vehicle) -> bool:
    if not first.overlaps_with_area(second):
        return False
    half_x, half_y = vehicle.half_extent
    return not first.intersection(second).shrink(half_x, half_y).is_empty()


def _prune(
    ranges: List[CellRange],
    grid: OccupancyGrid,
    vehicle: Vehicle
) -> List[CellRange]:
    kept = prune_boxes([r.to_box(grid) for r in ranges], vehicle)
    return [ranges[i] for i in kept]


def _grow_once(cells: CellRange, grid: OccupancyGrid) -> CellRange:
    """Try each side once, expanding by one cell row or column when free."""
    current = cells
    for side in _SIDES:
        candidate, new_cells = _expand(current, side)
        if new_cells and all(grid.is_free(c) for c in new_cells):
            current = candidate
    return current


def _expand(cells: CellRange, side: str) -> Tuple[CellRange, List[Cell]]:
    r0, r1, c0, c1 = cells.row_min, cells.row_max, cells.col_min, cells.col_max
    if side == "-x":
        return CellRange(r0, r1, c0 - 1, c1), [(r, c0 - 1) for r in range(r0, r1 + 1)]
    if side == "+x":
        return CellRange(r0, r1, c0, c1 + 1), [(r, c1 + 1) for r in range(r0, r1 + 1)]
    if side == "-y":
        return CellRange(r0 - 1, r1, c0, c1), [(r0 - 1, c) for c in range(c0, c1 + 1)]
    return CellRange(r0, r1 + 1, c0, c1), [(r1 + 1, c) for c in range(c0, c1 + 1)]
