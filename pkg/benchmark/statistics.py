"""
Benchmark Statistics Module

Aggregates per-instance benchmark rows into the summary table: solver and
total times, moving times, relative moving-time gap and failure counts.
"""

from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence

import numpy as np
from dataclasses_json import dataclass_json

SUCCESS_STATUSES = ("Solved", "SolvedAnalytic")


def _mean(values: Sequence[float]) -> Optional[float]:
    return float(np.mean(values)) if len(values) else None


def _max(values: Sequence[float]) -> Optional[float]:
    return float(np.max(values)) if len(values) else None


@dataclass_json
@dataclass
class MethodSummary:
    """
    Summary of one method over a suite. Times are in milliseconds except
    ``avg_t_move`` and ``avg_t_total_plus_move``, which are in seconds.
    """
    method: str
    instances: int = 0
    solved: int = 0
    avg_t_solver_ms: Optional[float] = None
    max_t_solver_ms: Optional[float] = None
    avg_t_total_ms: Optional[float] = None
    max_t_total_ms: Optional[float] = None
    avg_t_move: Optional[float] = None
    avg_t_total_plus_move: Optional[float] = None
    infeasible_cases: int = 0
    solver_failures: int = 0


@dataclass_json
@dataclass
class BenchmarkSummary:
    """
    Attributes:
        primitive: Primitive planner summary
        baseline: Transcription baseline summary
        refined: Baseline on the comparison grid, when one was run
        eps_move_median_percent: Median relative moving-time gap (%)
        eps_move_std_percent: Standard deviation of the gap (%)
        eps_move_mean_percent: Mean gap (%)
        analytic_solutions: Instances solved by the analytic plan
        analytic_corridor_counts: Corridor counts of those instances
    """
    primitive: MethodSummary
    baseline: MethodSummary
    refined: Optional[MethodSummary] = None
    eps_move_median_percent: Optional[float] = None
    eps_move_std_percent: Optional[float] = None
    eps_move_mean_percent: Optional[float] = None
    analytic_solutions: int = 0
    analytic_corridor_counts: List[int] = field(default_factory=list)


def summarize_method(
    method: str,
    prefix: str,
    results: Sequence[Any],
    timings: Sequence[Any]
) -> MethodSummary:
    """
    Summarize the ``prefix`` columns (``primitive``, ``baseline`` or ``refined``).

    Instances whose method was skipped are not counted.
    """
    summary = MethodSummary(method=method)
    solver_ms: List[float] = []
    total_ms: List[float] = []
    moves: List[float] = []
    total_plus_move: List[float] = []
    violation_field = "primitive_infeasible_samples" if prefix == "primitive" else f"{prefix}_violations"

    for result, timing in zip(results, timings):
        status = getattr(result, f"{prefix}_status")
        if status == "Skipped":
            continue
        summary.instances += 1
        solver_ms.append(getattr(timing, f"{prefix}_t_solver_ms"))
        total_ms.append(getattr(timing, f"{prefix}_t_total_ms"))
        if status not in SUCCESS_STATUSES:
            if status == "SolverFailure" or status.startswith("Error"):
                summary.solver_failures += 1
            continue
        summary.solved += 1
        t_move = getattr(result, f"{prefix}_t_move")
        moves.append(t_move)
        total_plus_move.append(getattr(timing, f"{prefix}_t_total_ms") / 1000.0 + t_move)
        if getattr(result, violation_field) > 0:
            summary.infeasible_cases += 1

    summary.avg_t_solver_ms = _mean(solver_ms)
    summary.max_t_solver_ms = _max(solver_ms)
    summary.avg_t_total_ms = _mean(total_ms)
    summary.max_t_total_ms = _max(total_ms)
    summary.avg_t_move = _mean(moves)
    summary.avg_t_total_plus_move = _mean(total_plus_move)
    return summary


def summarize(results: Sequence[Any], timings: Sequence[Any]) -> BenchmarkSummary:
    """
    Build the suite summary from aligned result and timing rows.

    Args:
        results: Per-instance deterministic rows
        timings: Per-instance timing rows, same order as ``results``

    Returns:
        Benchmark summary
    """
    summary = BenchmarkSummary(
        primitive=summarize_method("primitive", "primitive", results, timings),
        baseline=summarize_method("baseline", "baseline", results, timings),
    )
    if any(result.refined_status != "Skipped" for result in results):
        summary.refined = summarize_method("refined", "refined", results, timings)

    gaps = np.array([r.eps_move for r in results if r.eps_move is not None], dtype=float) * 100.0
    if gaps.size:
        summary.eps_move_median_percent = float(np.median(gaps))
        summary.eps_move_std_percent = float(np.std(gaps))
        summary.eps_move_mean_percent = float(np.mean(gaps))

    for result in results:
        if result.primitive_analytic and result.primitive_status == "SolvedAnalytic":
            summary.analytic_solutions += 1
            summary.analytic_corridor_counts.append(result.n_corridors)
    return summary
