"""
Corridor Models Module

Defines the rectangular free-space corridors and the ordered corridor
sequence used by the heuristics, the primitive problem and the baseline.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import List, Optional

from dataclasses_json import dataclass_json

from core.geometry import Box
from world.models import Cell, OccupancyGrid, Vehicle

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass(frozen=True)
class CellRange:
    """Inclusive rectangular block of grid cells."""
    row_min: int
    row_max: int
    col_min: int
    col_max: int

    @classmethod
    def from_cells(cls, cells: List[Cell]) -> "CellRange":
        rows = [c[0] for c in cells]
        cols = [c[1] for c in cells]
        return cls(min(rows), max(rows), min(cols), max(cols))

    def cells(self) -> List[Cell]:
        return [
            (row, col)
            for row in range(self.row_min, self.row_max + 1)
            for col in range(self.col_min, self.col_max + 1)
        ]

    def to_box(self, grid: OccupancyGrid) -> Box:
        low = grid.cell_box((self.row_min, self.col_min))
        high = grid.cell_box((self.row_max, self.col_max))
        return Box(low.x_min, high.x_max, low.y_min, high.y_max)


@dataclass_json
@dataclass(frozen=True)
class Corridor:
    """
    Axis-aligned obstacle-free rectangle.

    Attributes:
        box: Metric rectangle (meters)
        cells: Covered cell block, None for corridors built directly from boxes
    """
    box: Box
    cells: Optional[CellRange] = None

    @classmethod
    def from_cells(cls, cells: CellRange, grid: OccupancyGrid) -> "Corridor":
        return cls(box=cells.to_box(grid), cells=cells)

    @classmethod
    def from_bounds(
        cls,
        x_min: float,
        x_max: float,
        y_min: float,
        y_max: float
    ) -> "Corridor":
        return cls(box=Box(x_min, x_max, y_min, y_max))

    def inflated(self, vehicle: Vehicle) -> Box:
        """Admissible box for the vehicle center inside this corridor."""
        half_x, half_y = vehicle.half_extent
        return self.box.shrink(half_x, half_y)


@dataclass_json
@dataclass
class CorridorSequence:
    """Ordered corridors C_0 .. C_{n-1}; consecutive corridors overlap."""
    corridors: List[Corridor] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.corridors)

    def __getitem__(self, index: int) -> Corridor:
        return self.corridors[index]

    def boxes(self) -> List[Box]:
        return [c.box for c in self.corridors]

    def inflated_boxes(self, vehicle: Vehicle) -> List[Box]:
        return [c.inflated(vehicle) for c in self.corridors]

    def overlaps(self) -> List[Box]:
        """Return the consecutive overlaps O_{k-1,k} for k = 1 .. n-1."""
        return [
            self.corridors[k - 1].box.intersection(self.corridors[k].box)
            for k in range(1, len(self.corridors))
        ]

    def shrunken_overlaps(self, vehicle: Vehicle) -> List[Box]:
        """Consecutive overlaps shrunk by the vehicle half extents."""
        half_x, half_y = vehicle.half_extent
        return [overlap.shrink(half_x, half_y) for overlap in self.overlaps()]

    def to_export(self) -> str:
        """JSON array of corridor rectangles in meters."""
        export = []
        for corridor in self.corridors:
            entry = corridor.box.to_dict()
            if corridor.cells is not None:
                entry["cells"] = corridor.cells.to_dict()
            export.append(entry)
        return json.dumps(export, indent=2)
