"""
Instance Generator Module

Seeded random benchmark scenarios: cluttered grids or the checked-in
structured map, with vehicle bounds and endpoints drawn by rejection
sampling.
"""

import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.config_manager import get_config
from core.constants import MAX_GENERATION_REJECTIONS
from core.exceptions import GenerationStuck, NoPath, OutOfBounds
from core.geometry import vec2
from corridors.builder import shortest_cell_path
from world.map_io import read_map_file
from world.models import OccupancyGrid, Scenario, Vehicle, occupied_cells

logger = logging.getLogger(__name__)

STRUCTURED_MAP_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures", "structured.map"
)

KINDS = ("random", "structured")


@dataclass(frozen=True)
class BenchmarkConfig:
    """
    Attributes:
        kind: "random" (fresh cluttered grid per instance) or "structured"
        instances: Number of scenarios
        seed: Base seed; instance ``i`` uses ``default_rng([seed, i])``
        density: Probability of a cell being occupied (random kind)
        rows: Grid rows (random kind)
        cols: Grid columns (random kind)
        cell_size: Cell edge (meters, random kind)
        vehicle_size: Footprint edge W = L (meters)
        v_range: Range v_max is drawn from (meters/second)
        a_range: Range a_max is drawn from (meters/second^2)
        separation_factor: Endpoints must be more than this many W apart
        map_path: Map file for the structured kind
    """
    kind: str = "random"
    instances: int = 100
    seed: int = 0
    density: float = 0.1
    rows: int = 8
    cols: int = 10
    cell_size: float = 0.5
    vehicle_size: float = 0.4
    v_range: Tuple[float, float] = (0.5, 2.0)
    a_range: Tuple[float, float] = (2.0, 6.0)
    separation_factor: float = 5.0
    map_path: str = STRUCTURED_MAP_PATH

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Unknown benchmark kind '{self.kind}', expected one of {KINDS}")
        if not 0.0 <= self.density < 1.0:
            raise ValueError(f"Density must be in [0, 1), got {self.density}")
        for name in ("v_range", "a_range"):
            low, high = getattr(self, name)
            if not 0.0 < low <= high:
                raise ValueError(f"{name} must be positive and ordered, got {(low, high)}")

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None, **overrides: Any) -> "BenchmarkConfig":
        config = config or get_config()
        values: Dict[str, Any] = {
            "instances": config.get("bench_instances", 100),
            "density": config.get("bench_density", 0.1),
            "rows": config.get("bench_rows", 8),
            "cols": config.get("bench_cols", 10),
            "cell_size": config.get("bench_cell_size", 0.5),
            "vehicle_size": config.get("bench_vehicle_size", 0.4),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def random_grid(
    rows: int,
    cols: int,
    cell_size: float,
    density: float,
    rng: np.random.Generator
) -> OccupancyGrid:
    """Grid whose cells are occupied independently with probability ``density``."""
    occupied = rng.random((rows, cols)) < density
    return OccupancyGrid(rows, cols, cell_size, occupied)


def _footprint_free(point, vehicle: Vehicle, grid: OccupancyGrid) -> bool:
    try:
        cells = occupied_cells(point, vehicle, grid)
    except OutOfBounds:
        return False
    return all(grid.is_free(cell) for cell in cells)


def _connected(grid: OccupancyGrid, start, goal) -> bool:
    try:
        shortest_cell_path(grid, grid.cell_of(start), grid.cell_of(goal))
    except NoPath:
        return False
    return True


def sample_endpoints(
    grid: OccupancyGrid,
    vehicle: Vehicle,
    rng: np.random.Generator,
    separation_factor: float = 5.0,
    max_rejections: int = MAX_GENERATION_REJECTIONS
):
    """
    Draw start and goal positions by rejection.

    Both footprints must lie in the grid on free cells, the endpoints must be
    more than ``separation_factor * W`` apart and their cells connected.

    Raises:
        GenerationStuck: After ``max_rejections`` rejected draws.
    """
    extent = grid.extent.shrink(*vehicle.half_extent)
    if extent.is_empty():
        raise GenerationStuck(f"Vehicle does not fit in the {grid.rows}x{grid.cols} grid")
    separation = separation_factor * vehicle.width
    for _ in range(max_rejections):
        p0 = vec2(rng.uniform(extent.x_min, extent.x_max), rng.uniform(extent.y_min, extent.y_max))
        pn = vec2(rng.uniform(extent.x_min, extent.x_max), rng.uniform(extent.y_min, extent.y_max))
        if float(np.hypot(pn[0] - p0[0], pn[1] - p0[1])) <= separation:
            continue
        if not (_footprint_free(p0, vehicle, grid) and _footprint_free(pn, vehicle, grid)):
            continue
        if not _connected(grid, p0, pn):
            continue
        return p0, pn
    raise GenerationStuck(
        f"No valid endpoints after {max_rejections} rejections "
        f"({grid.occupied_count()} of {grid.rows * grid.cols} cells occupied)"
    )


def sample_scenario(
    grid: OccupancyGrid,
    rng: np.random.Generator,
    bench: BenchmarkConfig
) -> Scenario:
    """Draw vehicle bounds, then endpoints, for a given grid."""
    vehicle = Vehicle(
        width=bench.vehicle_size,
        length=bench.vehicle_size,
        v_max=float(rng.uniform(*bench.v_range)),
        a_max=float(rng.uniform(*bench.a_range)),
    )
    p0, pn = sample_endpoints(grid, vehicle, rng, bench.separation_factor)
    return Scenario(grid=grid, vehicle=vehicle, p0=p0, pn=pn)


def generate_instance(bench: BenchmarkConfig, index: int) -> Scenario:
    """Scenario ``index`` of a suite; depends only on the seed and the index."""
    rng = np.random.default_rng([bench.seed, index])
    if bench.kind == "structured":
        grid = read_map_file(bench.map_path)
    else:
        grid = random_grid(bench.rows, bench.cols, bench.cell_size, bench.density, rng)
    return sample_scenario(grid, rng, bench)


def generate_instances(bench: BenchmarkConfig) -> List[Scenario]:
    """
    Generate the whole suite.

    Raises:
        GenerationStuck: If any instance exhausts its rejection budget.
    """
    scenarios = [generate_instance(bench, index) for index in range(bench.instances)]
    logger.info(
        f"Generated {len(scenarios)} {bench.kind} instances (seed {bench.seed}, "
        f"density {bench.density})"
    )
    return scenarios
