"""
Geometry Module

This module defines the small planar geometry vocabulary shared by every
package: the ``Vec2`` alias and the closed axis-aligned ``Box``.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from dataclasses_json import dataclass_json

logger = logging.getLogger(__name__)

Vec2 = Tuple[float, float]

# Absolute tolerance used for closed-set membership tests (meters)
GEOMETRY_TOLERANCE: float = 1e-9


def vec2(x: float, y: float) -> Vec2:
    """Build a ``Vec2`` from two numbers, coercing numpy scalars to float."""
    return (float(x), float(y))


@dataclass_json
@dataclass(frozen=True)
class Box:
    """
    Closed axis-aligned box ``[x_min, x_max] x [y_min, y_max]``.

    A box with ``x_min > x_max`` or ``y_min > y_max`` is empty. Zero-width
    boxes are valid (segments and points).

    Attributes:
        x_min: Lower x bound in meters
        x_max: Upper x bound in meters
        y_min: Lower y bound in meters
        y_max: Upper y bound in meters
    """
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def is_empty(self, tol: float = GEOMETRY_TOLERANCE) -> bool:
        """Return True when the box has no points (up to ``tol``)."""
        return self.x_min > self.x_max + tol or self.y_min > self.y_max + tol

    def center(self) -> Vec2:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def corners(self) -> List[Vec2]:
        """
        Return the four corners in the fixed order (-x-y, +x-y, -x+y, +x+y).

        Coincident corners of degenerate boxes are returned once, keeping the
        first occurrence in that order.
        """
        ordered = [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_min, self.y_max),
            (self.x_max, self.y_max),
        ]
        unique: List[Vec2] = []
        for corner in ordered:
            if not any(
                abs(corner[0] - u[0]) <= GEOMETRY_TOLERANCE
                and abs(corner[1] - u[1]) <= GEOMETRY_TOLERANCE
                for u in unique
            ):
                unique.append(corner)
        return unique

    def contains(self, point: Vec2, tol: float = GEOMETRY_TOLERANCE) -> bool:
        return (
            self.x_min - tol <= point[0] <= self.x_max + tol
            and self.y_min - tol <= point[1] <= self.y_max + tol
        )

    def contains_box(self, other: "Box", tol: float = GEOMETRY_TOLERANCE) -> bool:
        return (
            self.x_min - tol <= other.x_min
            and other.x_max <= self.x_max + tol
            and self.y_min - tol <= other.y_min
            and other.y_max <= self.y_max + tol
        )

    def intersection(self, other: "Box") -> "Box":
        """Return the (possibly empty) intersection of two boxes."""
        return Box(
            max(self.x_min, other.x_min),
            min(self.x_max, other.x_max),
            max(self.y_min, other.y_min),
            min(self.y_max, other.y_max),
        )

    def overlaps_with_area(
        self,
        other: "Box",
        tol: float = GEOMETRY_TOLERANCE
    ) -> bool:
        """Return True when the intersection has positive area."""
        common = self.intersection(other)
        return common.width > tol and common.height > tol

    def shrink(self, half_x: float, half_y: float) -> "Box":
        """Shrink by ``half_x`` on both x sides and ``half_y`` on both y sides."""
        return Box(
            self.x_min + half_x,
            self.x_max - half_x,
            self.y_min + half_y,
            self.y_max - half_y,
        )

    def translate(self, dx: float, dy: float) -> "Box":
        return Box(self.x_min + dx, self.x_max + dx, self.y_min + dy, self.y_max + dy)

    def clamp(self, point: Vec2) -> Vec2:
        """Project a point onto the box (the box must be non-empty)."""
        return (
            min(max(point[0], self.x_min), self.x_max),
            min(max(point[1], self.y_min), self.y_max),
        )

    def bounds(self, axis: int) -> Tuple[float, float]:
        """Return ``(min, max)`` along axis 0 (x) or 1 (y)."""
        if axis == 0:
            return (self.x_min, self.x_max)
        return (self.y_min, self.y_max)


def union_contains(
    boxes: List[Box],
    point: Vec2,
    tol: float = GEOMETRY_TOLERANCE
) -> bool:
    """Return True if ``point`` lies in at least one of ``boxes``."""
    return any(box.contains(point, tol) for box in boxes)


def first_containing(
    boxes: List[Box],
    point: Vec2,
    tol: float = GEOMETRY_TOLERANCE
) -> Optional[int]:
    """Return the index of the first box containing ``point`` or None."""
    for index, box in enumerate(boxes):
        if box.contains(point, tol):
            return index
    return None
