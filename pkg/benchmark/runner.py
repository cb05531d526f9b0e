"""
Benchmark Runner Module

Runs the primitive planner and the transcription baseline on a suite of
scenarios, optionally in worker processes, and writes the per-instance
results, the timings and the summary.
"""

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Any, Dict, List, Optional, Sequence

from dataclasses_json import dataclass_json

from baseline.transcription import intersample_violation_count, solve_baseline
from benchmark.statistics import summarize
from config.config_manager import get_config
from core.constants import FEASIBILITY_TOLERANCE
from planner.feasibility import check_trajectory
from planner.models import PlanResult
from planner.planner import plan
from world.models import Scenario

logger = logging.getLogger(__name__)

SKIPPED = "Skipped"


def _ms(seconds: float) -> float:
    return round(seconds * 1000.0, 3)


@dataclass_json
@dataclass
class InstanceResult:
    """
    Deterministic outcome of one benchmark instance.

    ``eps_move`` is ``(t_move_primitive - t_move_baseline) / t_move_baseline`` when both
    methods succeeded. The ``refined_*`` fields are only filled when a
    second baseline grid is compared.
    """
    index: int
    n_corridors: int = 0
    primitive_status: str = SKIPPED
    primitive_t_move: Optional[float] = None
    primitive_analytic: bool = False
    primitive_infeasible_samples: int = 0
    baseline_status: str = SKIPPED
    baseline_t_move: Optional[float] = None
    baseline_violations: int = 0
    eps_move: Optional[float] = None
    refined_status: str = SKIPPED
    refined_t_move: Optional[float] = None
    refined_violations: int = 0


@dataclass_json
@dataclass
class InstanceTiming:
    """Wall-clock columns of one instance (milliseconds, 3 decimals)."""
    index: int
    primitive_t_solver_ms: float = 0.0
    primitive_t_total_ms: float = 0.0
    baseline_t_solver_ms: float = 0.0
    baseline_t_total_ms: float = 0.0
    refined_t_solver_ms: float = 0.0
    refined_t_total_ms: float = 0.0


@dataclass
class InstanceOutcome:
    result: InstanceResult
    timing: InstanceTiming


def _succeeded(run: PlanResult) -> bool:
    return run.report.status.succeeded and run.trajectory is not None


def run_instance(
    index: int,
    scenario: Scenario,
    config: Dict[str, Any],
    baseline_grid: int,
    compare_grid: Optional[int] = None
) -> InstanceOutcome:
    """Run both methods on one scenario; failures are recorded, never raised."""
    result = InstanceResult(index=index)
    timing = InstanceTiming(index=index)
    try:
        planned = plan(scenario, config)
    except Exception as e:
        logger.error(f"Instance {index}: planner raised {e}", exc_info=True)
        result.primitive_status = f"Error: {type(e).__name__}"
        return InstanceOutcome(result, timing)

    report = planned.report
    result.primitive_status = report.status.value
    result.n_corridors = report.n_corridors
    result.primitive_analytic = report.used_analytic
    timing.primitive_t_solver_ms = _ms(report.t_solver)
    timing.primitive_t_total_ms = _ms(report.t_total)
    if _succeeded(planned):
        result.primitive_t_move = report.t_move
        check = check_trajectory(
            planned.trajectory, planned.sequence, scenario.vehicle,
            float(config.get("sample_rate", 100.0)), FEASIBILITY_TOLERANCE,
        )
        result.primitive_infeasible_samples = (
            check.violating_samples + check.extremum_violations
            + check.velocity_violations + check.acceleration_violations
        )

    if planned.sequence is None:
        return InstanceOutcome(result, timing)

    grids = [("baseline", baseline_grid)]
    if compare_grid:
        grids.append(("refined", compare_grid))
    for prefix, grid_points in grids:
        try:
            run = solve_baseline(planned.sequence, scenario, grid_points, config)
        except Exception as e:
            logger.error(f"Instance {index}: baseline ({grid_points}) raised {e}", exc_info=True)
            setattr(result, f"{prefix}_status", f"Error: {type(e).__name__}")
            continue
        setattr(result, f"{prefix}_status", run.report.status.value)
        setattr(timing, f"{prefix}_t_solver_ms", _ms(run.report.t_solver))
        setattr(timing, f"{prefix}_t_total_ms", _ms(run.report.t_total))
        if _succeeded(run):
            setattr(result, f"{prefix}_t_move", run.report.t_move)
            setattr(
                result, f"{prefix}_violations",
                intersample_violation_count(run.trajectory, planned.sequence, scenario.vehicle),
            )

    if result.primitive_t_move is not None and result.baseline_t_move:
        result.eps_move = (result.primitive_t_move - result.baseline_t_move) / result.baseline_t_move
    logger.info(
        f"Instance {index}: primitive {result.primitive_status} t_move={result.primitive_t_move}, "
        f"baseline {result.baseline_status} t_move={result.baseline_t_move}"
    )
    return InstanceOutcome(result, timing)


def run_benchmark(
    scenarios: Sequence[Scenario],
    config: Optional[Dict[str, Any]] = None,
    workers: int = 1,
    baseline_grid: Optional[int] = None,
    compare_grid: Optional[int] = None
) -> List[InstanceOutcome]:
    """
    Run every scenario, in ``workers`` processes when more than one.

    Returns:
        Outcomes ordered by instance index
    """
    config = config or get_config()
    baseline_grid = baseline_grid or int(config.get("baseline_grid_points", 30))
    logger.info(
        f"Running {len(scenarios)} instances with {workers} worker(s), "
        f"baseline grid {baseline_grid}" + (f", compared with {compare_grid}" if compare_grid else "")
    )
    if workers <= 1:
        outcomes = [
            run_instance(index, scenario, config, baseline_grid, compare_grid)
            for index, scenario in enumerate(scenarios)
        ]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [
                executor.submit(run_instance, index, scenario, config, baseline_grid, compare_grid)
                for index, scenario in enumerate(scenarios)
            ]
            outcomes = [future.result() for future in futures]
    return sorted(outcomes, key=lambda outcome: outcome.result.index)


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: str, rows: List[Any]) -> None:
    if not rows:
        return
    names = [f.name for f in fields(rows[0])]
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(names)
        for row in rows:
            writer.writerow([_format(getattr(row, name)) for name in names])


def write_results(outcomes: List[InstanceOutcome], out_dir: str) -> Dict[str, str]:
    """
    Write ``results.csv`` (deterministic columns), ``timings.csv`` and
    ``summary.json`` into ``out_dir``.

    Returns:
        Mapping from file kind to path
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "results": os.path.join(out_dir, "results.csv"),
        "timings": os.path.join(out_dir, "timings.csv"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    results = [outcome.result for outcome in outcomes]
    timings = [outcome.timing for outcome in outcomes]
    _write_rows(paths["results"], results)
    _write_rows(paths["timings"], timings)
    summary = summarize(results, timings)
    with open(paths["summary"], "w", encoding="utf-8") as f:
        f.write(summary.to_json(indent=2))
        f.write("\n")
    logger.info(f"Wrote benchmark results to {out_dir}")
    return paths
