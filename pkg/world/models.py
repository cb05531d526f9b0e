"""
World Models Module

This module defines the environment and vehicle model: the rectangular
vehicle, the occupancy grid, the planning scenario and the footprint and
cell-occupancy queries built on top of them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple

import numpy as np

from core.exceptions import OutOfBounds, ValidationError
from core.geometry import GEOMETRY_TOLERANCE, Box, Vec2, vec2

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass(frozen=True)
class Vehicle:
    """
    Holonomic vehicle with a rectangular, axis-aligned footprint.

    Attributes:
        width: Footprint extent W along x (meters)
        length: Footprint extent L along y (meters)
        v_max: Per-axis velocity bound (meters/second)
        a_max: Per-axis acceleration bound (meters/second^2)
    """
    width: float
    length: float
    v_max: float
    a_max: float

    def __post_init__(self) -> None:
        for name in ("width", "length", "v_max", "a_max"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"Vehicle {name} must be positive, got {value}")

    @property
    def half_extent(self) -> Vec2:
        return (0.5 * self.width, 0.5 * self.length)


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """
    Square-cell occupancy grid.

    Cells are indexed ``(row, col)``; x grows with the column index, y with
    the row index and ``origin`` is the world position of the corner of cell
    (0, 0).

    Attributes:
        rows: Number of cell rows
        cols: Number of cell columns
        cell_size: Edge length of each cell (meters)
        occupied: Boolean array of shape (rows, cols), True = obstacle
        origin: World coordinates of the grid corner
        cell_size_text: Cell size exactly as written in the map header, if any
    """
    rows: int
    cols: int
    cell_size: float
    occupied: np.ndarray = field(repr=False)
    origin: Vec2 = (0.0, 0.0)
    cell_size_text: Optional[str] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.rows <= 0 or self.cols <= 0:
            raise ValidationError(
                f"Grid dimensions must be positive, got {self.rows}x{self.cols}"
            )
        if not self.cell_size > 0:
            raise ValidationError(f"Cell size must be positive, got {self.cell_size}")
        if self.cell_size_text is not None and float(self.cell_size_text) != self.cell_size:
            raise ValidationError(
                f"Cell size text '{self.cell_size_text}' does not match {self.cell_size}"
            )
        occupied = np.asarray(self.occupied, dtype=bool)
        if occupied.shape != (self.rows, self.cols):
            raise ValidationError(
                f"Occupancy shape {occupied.shape} does not match "
                f"{self.rows}x{self.cols}"
            )
        occupied = occupied.copy()
        occupied.setflags(write=False)
        object.__setattr__(self, "occupied", occupied)

    @classmethod
    def empty(
        cls,
        rows: int,
        cols: int,
        cell_size: float,
        origin: Vec2 = (0.0, 0.0)
    ) -> "OccupancyGrid":
        """Create an obstacle-free grid."""
        return cls(rows, cols, cell_size, np.zeros((rows, cols), dtype=bool), origin)

    @property
    def extent(self) -> Box:
        """World box covered by the grid."""
        return Box(
            self.origin[0],
            self.origin[0] + self.cols * self.cell_size,
            self.origin[1],
            self.origin[1] + self.rows * self.cell_size,
        )

    def in_grid(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def is_free(self, cell: Cell) -> bool:
        return self.in_grid(cell) and not bool(self.occupied[cell[0], cell[1]])

    def cell_box(self, cell: Cell) -> Box:
        """Return the world box of a cell."""
        row, col = cell
        x0 = self.origin[0] + col * self.cell_size
        y0 = self.origin[1] + row * self.cell_size
        return Box(x0, x0 + self.cell_size, y0, y0 + self.cell_size)

    def cell_of(self, point: Vec2) -> Cell:
        """Return the cell containing ``point`` (clamped to the grid)."""
        col = int(math.floor((point[0] - self.origin[0]) / self.cell_size))
        row = int(math.floor((point[1] - self.origin[1]) / self.cell_size))
        return (min(max(row, 0), self.rows - 1), min(max(col, 0), self.cols - 1))

    def occupied_count(self) -> int:
        return int(self.occupied.sum())

    def with_occupied(self, occupied: np.ndarray) -> "OccupancyGrid":
        return OccupancyGrid(
            self.rows, self.cols, self.cell_size, occupied, self.origin, self.cell_size_text
        )

    def mirrored_x(self) -> "OccupancyGrid":
        """Return the grid reflected about its vertical center line."""
        return self.with_occupied(self.occupied[:, ::-1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.cell_size == other.cell_size
            and tuple(self.origin) == tuple(other.origin)
            and bool(np.array_equal(self.occupied, other.occupied))
        )


@dataclass(frozen=True)
class Scenario:
    """
    A planning query: grid, vehicle, start state and goal position.

    The terminal velocity is always zero.

    Attributes:
        grid: Environment occupancy grid
        vehicle: Vehicle model
        p0: Start position (meters)
        pn: Goal position (meters)
        v0: Initial velocity (meters/second)
    """
    grid: OccupancyGrid
    vehicle: Vehicle
    p0: Vec2
    pn: Vec2
    v0: Vec2 = (0.0, 0.0)

    def validate(self) -> None:
        """
        Check the scenario invariants.

        Raises:
            ValidationError: If an endpoint footprint leaves the grid or
                overlaps an occupied cell, or the initial velocity exceeds
                the vehicle bound.
        """
        for name, point in (("start", self.p0), ("goal", self.pn)):
            try:
                cells = occupied_cells(point, self.vehicle, self.grid)
            except OutOfBounds as e:
                raise ValidationError(f"{name} footprint leaves the grid: {e}") from e
            blocked = sorted(c for c in cells if not self.grid.is_free(c))
            if blocked:
                raise ValidationError(
                    f"{name} footprint at {point} overlaps occupied cells {blocked}"
                )
        if max(abs(self.v0[0]), abs(self.v0[1])) > self.vehicle.v_max + 1e-12:
            raise ValidationError(
                f"Initial velocity {self.v0} exceeds v_max={self.vehicle.v_max}"
            )

    def cells_fit_vehicle(self) -> bool:
        """Return True when every cell is at least as large as the footprint."""
        return self.grid.cell_size + 1e-12 >= max(
            self.vehicle.width, self.vehicle.length
        )

    def mirrored_x(self) -> "Scenario":
        """Return the scenario reflected about the grid's vertical center line."""
        extent = self.grid.extent
        axis = extent.x_min + extent.x_max
        return Scenario(
            grid=self.grid.mirrored_x(),
            vehicle=self.vehicle,
            p0=vec2(axis - self.p0[0], self.p0[1]),
            pn=vec2(axis - self.pn[0], self.pn[1]),
            v0=vec2(-self.v0[0], self.v0[1]),
        )


def footprint(p: Vec2, vehicle: Vehicle) -> Box:
    """
    Return the closed footprint box of the vehicle centered at ``p``.

    Args:
        p: Vehicle center (meters)
        vehicle: Vehicle model

    Returns:
        Box ``{q : |p - q| <= (W/2, L/2)}``
    """
    half_x, half_y = vehicle.half_extent
    return Box(p[0] - half_x, p[0] + half_x, p[1] - half_y, p[1] + half_y)


def occupied_cells(p: Vec2, vehicle: Vehicle, grid: OccupancyGrid) -> Set[Cell]:
    """
    Return every cell whose interior overlaps the footprint interior.

    Boundary contact alone does not count, so a vehicle exactly filling a
    cell occupies exactly that cell.

    Args:
        p: Vehicle center (meters)
        vehicle: Vehicle model
        grid: Occupancy grid

    Returns:
        Set of (row, col) cell indices

    Raises:
        OutOfBounds: If the footprint leaves the grid extent.
    """
    box = footprint(p, vehicle)
    if not grid.extent.contains_box(box):
        raise OutOfBounds(f"Footprint {box} leaves grid extent {grid.extent}")

    cols = _overlapping_indices(
        box.x_min - grid.origin[0], box.x_max - grid.origin[0],
        grid.cell_size, grid.cols
    )
    rows = _overlapping_indices(
        box.y_min - grid.origin[1], box.y_max - grid.origin[1],
        grid.cell_size, grid.rows
    )
    return {(row, col) for row in rows for col in cols}


def ordered_occupied_cells(
    p: Vec2,
    vehicle: Vehicle,
    grid: OccupancyGrid,
    anchor: Cell
) -> List[Cell]:
    """
    Return ``occupied_cells`` as a 4-connected walk that ends at ``anchor``.

    A footprint no larger than a cell covers one cell, a pair of cells or a
    2x2 block, so such a walk always exists. Any other shape falls back to
    row-major order followed by the anchor.

    Args:
        p: Vehicle center (meters)
        vehicle: Vehicle model
        grid: Occupancy grid
        anchor: Cell that must come last (the cell containing ``p``)

    Returns:
        Ordered list of cells
    """
    cells = occupied_cells(p, vehicle, grid)
    if anchor not in cells:
        return sorted(cells) + [anchor]
    others = sorted(cells - {anchor})
    if len(others) <= 1:
        return others + [anchor]
    if len(others) == 3:
        row, col = anchor
        horizontal = next((c for c in others if c[0] == row), None)
        vertical = next((c for c in others if c[1] == col), None)
        diagonal = next(
            (c for c in others if c[0] != row and c[1] != col), None
        )
        if horizontal and vertical and diagonal:
            return [horizontal, diagonal, vertical, anchor]
    logger.warning(
        f"Footprint at {p} covers {len(cells)} cells; cell size is smaller "
        f"than the vehicle"
    )
    return others + [anchor]


def _overlapping_indices(
    low: float,
    high: float,
    cell_size: float,
    count: int
) -> range:
    """Indices of cells whose open interval meets the open interval (low, high)."""
    first = int(math.floor(low / cell_size + GEOMETRY_TOLERANCE))
    last = int(math.ceil(high / cell_size - GEOMETRY_TOLERANCE)) - 1
    if last < first:
        # Zero-width footprint: report the cell containing the point
        last = first
    first = max(first, 0)
    last = min(last, count - 1)
    return range(first, last + 1)
