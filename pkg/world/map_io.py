"""
Map I/O Module

This module reads and writes the text map format and the JSON scenario
format.

Map format::

    cells <rows> <cols> <cell_size_m>
    <row rows-1>
    ...
    <row 0>

Row 0 is printed last so the file reads like a plot with y pointing up.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from core.constants import FREE_CELL, MAP_HEADER, OCCUPIED_CELL
from core.exceptions import ParseError
from core.geometry import Vec2, vec2
from world.models import OccupancyGrid, Scenario, Vehicle

logger = logging.getLogger(__name__)


def load_map(text: str) -> OccupancyGrid:
    """
    Parse the text map format.

    Args:
        text: Map file contents

    Returns:
        Parsed occupancy grid

    Raises:
        ParseError: With the offending 1-based line number and the reason.
    """
    lines = [line.rstrip() for line in text.splitlines()]
    # Trailing blank lines are not rows
    while lines and not lines[-1]:
        lines.pop()
    if not lines:
        raise ParseError(1, "empty map")

    header = lines[0].split()
    if len(header) != 4 or header[0] != MAP_HEADER:
        raise ParseError(
            1, f"expected '{MAP_HEADER} <rows> <cols> <cell_size>', got '{lines[0]}'"
        )
    try:
        rows = int(header[1])
        cols = int(header[2])
        cell_size = float(header[3])
    except ValueError as e:
        raise ParseError(1, f"invalid header value: {e}") from e
    if rows <= 0 or cols <= 0:
        raise ParseError(1, f"grid dimensions must be positive, got {rows}x{cols}")
    if not cell_size > 0:
        raise ParseError(1, f"cell size must be positive, got {cell_size}")

    body = lines[1:]
    if len(body) != rows:
        raise ParseError(
            min(len(lines), rows + 1) + (1 if len(body) < rows else 0),
            f"expected {rows} grid rows, found {len(body)}"
        )

    occupied = np.zeros((rows, cols), dtype=bool)
    for offset, line in enumerate(body):
        line_number = offset + 2
        if len(line) != cols:
            raise ParseError(
                line_number, f"expected {cols} cells, found {len(line)}"
            )
        row = rows - 1 - offset
        for col, symbol in enumerate(line):
            if symbol == OCCUPIED_CELL:
                occupied[row, col] = True
            elif symbol != FREE_CELL:
                raise ParseError(
                    line_number, f"unexpected symbol '{symbol}' in column {col}"
                )

    grid = OccupancyGrid(rows, cols, cell_size, occupied, cell_size_text=header[3])
    logger.debug(
        f"Loaded {rows}x{cols} map with cell size {cell_size} and "
        f"{grid.occupied_count()} occupied cells"
    )
    return grid


def serialize_map(grid: OccupancyGrid) -> str:
    """
    Return the text map form of ``grid`` (inverse of ``load_map``).

    A grid read from text keeps its header cell size token verbatim; other
    grids print the shortest text that reads back to the same float.
    """
    cell_size = grid.cell_size_text or repr(float(grid.cell_size))
    lines = [f"{MAP_HEADER} {grid.rows} {grid.cols} {cell_size}"]
    for row in range(grid.rows - 1, -1, -1):
        lines.append("".join(
            OCCUPIED_CELL if grid.occupied[row, col] else FREE_CELL
            for col in range(grid.cols)
        ))
    return "\n".join(lines) + "\n"


def read_map_file(path: str) -> OccupancyGrid:
    with open(path, "r", encoding="utf-8") as f:
        return load_map(f.read())


def load_scenario(text: str, base_dir: Optional[str] = None) -> Scenario:
    """
    Parse and validate a JSON scenario.

    The ``map`` entry is either inline map text (recognised by its leading
    ``cells`` header) or a path, resolved against ``base_dir`` when relative.

    Args:
        text: Scenario JSON
        base_dir: Directory used to resolve a relative map path

    Returns:
        Validated scenario

    Raises:
        ParseError: If the JSON or the map cannot be parsed.
        ValidationError: If the scenario violates its invariants.
        OSError: If a referenced map file cannot be read.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.lineno, e.msg) from e
    if not isinstance(data, dict):
        raise ParseError(1, "scenario must be a JSON object")

    map_entry = _require(data, "map")
    if not isinstance(map_entry, str):
        raise ParseError(0, "'map' must be a path or inline map text")
    if map_entry.lstrip().startswith(MAP_HEADER):
        grid = load_map(map_entry)
    else:
        path = map_entry
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        logger.debug(f"Reading map file {path}")
        grid = read_map_file(path)

    vehicle_entry = _require(data, "vehicle")
    vehicle = Vehicle(
        width=_number(vehicle_entry, "W"),
        length=_number(vehicle_entry, "L"),
        v_max=_number(vehicle_entry, "v_max"),
        a_max=_number(vehicle_entry, "a_max"),
    )

    start = _require(data, "start")
    goal = _require(data, "goal")
    p0 = _point(_require(start, "p"), "start.p")
    v0 = _point(start.get("v", [0.0, 0.0]), "start.v")
    pn = _point(_require(goal, "p"), "goal.p")

    scenario = Scenario(grid=grid, vehicle=vehicle, p0=p0, pn=pn, v0=v0)
    scenario.validate()
    return scenario


def read_scenario_file(path: str) -> Scenario:
    """Load a scenario file, resolving its map path next to the file."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return load_scenario(text, base_dir=os.path.dirname(os.path.abspath(path)))


def dump_scenario(scenario: Scenario) -> str:
    """Return the JSON form of ``scenario`` with the map inlined."""
    vehicle = scenario.vehicle
    data: Dict[str, Any] = {
        "map": serialize_map(scenario.grid),
        "vehicle": {
            "W": vehicle.width,
            "L": vehicle.length,
            "v_max": vehicle.v_max,
            "a_max": vehicle.a_max,
        },
        "start": {"p": list(scenario.p0), "v": list(scenario.v0)},
        "goal": {"p": list(scenario.pn)},
    }
    return json.dumps(data, indent=2) + "\n"


def _require(data: Any, key: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise ParseError(0, f"missing required key '{key}'")
    return data[key]


def _number(data: Dict[str, Any], key: str) -> float:
    value = _require(data, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(0, f"'{key}' must be a number, got {value!r}")
    return float(value)


def _point(value: Any, name: str) -> Vec2:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
    ):
        raise ParseError(0, f"'{name}' must be a list of two numbers, got {value!r}")
    return vec2(value[0], value[1])


def parse_vehicle_spec(text: str) -> Vehicle:
    """
    Parse a ``W,L,v_max,a_max`` vehicle description.

    Raises:
        ParseError: If the text does not hold four numbers.
    """
    parts: List[str] = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ParseError(1, f"expected 'W,L,v_max,a_max', got '{text}'")
    try:
        values = [float(p) for p in parts]
    except ValueError as e:
        raise ParseError(1, f"invalid vehicle value: {e}") from e
    return Vehicle(*values)
