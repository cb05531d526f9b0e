import csv
import json

import numpy as np
import pytest

from benchmark.generator import (
    STRUCTURED_MAP_PATH,
    BenchmarkConfig,
    generate_instance,
    generate_instances,
    random_grid,
)
from benchmark.runner import (
    InstanceOutcome,
    InstanceResult,
    InstanceTiming,
    run_benchmark,
    run_instance,
    write_results,
)
from benchmark.statistics import summarize, summarize_method
from core.exceptions import GenerationStuck
from world.map_io import load_map, read_map_file
from world.models import Scenario


class TestBenchmarkConfig:
    def test_from_config_ignores_missing_overrides(self, config):
        bench = BenchmarkConfig.from_config(config, seed=3, density=None)
        assert bench.seed == 3
        assert bench.density == pytest.approx(config["bench_density"])
        assert (bench.rows, bench.cols, bench.cell_size) == (8, 10, 0.5)

    @pytest.mark.parametrize("overrides", [
        {"kind": "maze"},
        {"density": 1.0},
        {"v_range": (2.0, 1.0)},
        {"a_range": (0.0, 1.0)},
    ])
    def test_rejects_bad_values(self, overrides):
        with pytest.raises(ValueError):
            BenchmarkConfig(**overrides)


class TestGenerator:
    def test_instances_depend_only_on_seed_and_index(self):
        bench = BenchmarkConfig(instances=3, seed=42)
        first = generate_instance(bench, 2)
        again = generate_instances(bench)[2]
        assert first.grid == again.grid
        assert first.vehicle == again.vehicle
        assert (first.p0, first.pn) == (again.p0, again.pn)

    def test_different_seeds_differ(self):
        a = generate_instance(BenchmarkConfig(seed=1), 0)
        b = generate_instance(BenchmarkConfig(seed=2), 0)
        assert (a.p0, a.pn) != (b.p0, b.pn)

    def test_generated_scenarios_are_valid(self):
        bench = BenchmarkConfig(instances=5, seed=7)
        for scenario in generate_instances(bench):
            scenario.validate()
            assert 0.5 <= scenario.vehicle.v_max <= 2.0
            assert 2.0 <= scenario.vehicle.a_max <= 6.0
            distance = np.hypot(scenario.pn[0] - scenario.p0[0], scenario.pn[1] - scenario.p0[1])
            assert distance > 5.0 * scenario.vehicle.width

    def test_structured_kind_uses_fixture_map(self):
        scenario = generate_instance(BenchmarkConfig(kind="structured", instances=1), 0)
        assert scenario.grid == read_map_file(STRUCTURED_MAP_PATH)
        scenario.validate()

    def test_random_grid_density(self):
        grid = random_grid(40, 50, 0.5, 0.3, np.random.default_rng(0))
        assert 0.25 < grid.occupied_count() / 2000 < 0.35

    def test_crowded_grid_gets_stuck(self):
        bench = BenchmarkConfig(instances=1, rows=4, cols=4, density=0.95)
        with pytest.raises(GenerationStuck):
            generate_instances(bench)


def _outcome(index, primitive, baseline, analytic=False, n_corridors=2):
    result = InstanceResult(
        index=index,
        n_corridors=n_corridors,
        primitive_status="SolvedAnalytic" if analytic else "Solved",
        primitive_t_move=primitive,
        primitive_analytic=analytic,
        baseline_status="Solved" if baseline is not None else "SolverFailure",
        baseline_t_move=baseline,
    )
    if baseline is not None:
        result.eps_move = (primitive - baseline) / baseline
    timing = InstanceTiming(
        index=index,
        primitive_t_solver_ms=2.0,
        primitive_t_total_ms=4.0,
        baseline_t_solver_ms=10.0,
        baseline_t_total_ms=12.0,
    )
    return InstanceOutcome(result, timing)


class TestStatistics:
    @pytest.fixture
    def outcomes(self):
        return [
            _outcome(0, 2.0, 2.0, analytic=True, n_corridors=1),
            _outcome(1, 3.3, 3.0),
            _outcome(2, 4.0, None),
        ]

    def test_method_summary(self, outcomes):
        results = [o.result for o in outcomes]
        timings = [o.timing for o in outcomes]
        primitive = summarize_method("primitive", "primitive", results, timings)
        assert (primitive.instances, primitive.solved) == (3, 3)
        assert primitive.avg_t_move == pytest.approx(3.1)
        assert primitive.avg_t_total_plus_move == pytest.approx(3.1 + 0.004)
        baseline = summarize_method("baseline", "baseline", results, timings)
        assert (baseline.solved, baseline.solver_failures) == (2, 1)
        assert baseline.max_t_solver_ms == pytest.approx(10.0)

    def test_suite_summary(self, outcomes):
        summary = summarize([o.result for o in outcomes], [o.timing for o in outcomes])
        assert summary.eps_move_median_percent == pytest.approx(5.0)
        assert summary.eps_move_mean_percent == pytest.approx(5.0)
        assert summary.eps_move_std_percent == pytest.approx(5.0)
        assert summary.analytic_solutions == 1
        assert summary.analytic_corridor_counts == [1]
        assert summary.refined is None

    def test_skipped_methods_are_not_counted(self):
        result = InstanceResult(index=0, primitive_status="NoPath")
        summary = summarize([result], [InstanceTiming(index=0)])
        assert summary.primitive.instances == 1 and summary.primitive.solved == 0
        assert summary.baseline.instances == 0
        assert summary.baseline.avg_t_move is None

    def test_write_results(self, outcomes, tmp_path):
        paths = write_results(outcomes, str(tmp_path / "bench"))
        with open(paths["results"], encoding="utf-8", newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 3
        assert rows[0]["primitive_analytic"] == "1"
        assert rows[2]["baseline_t_move"] == ""
        assert rows[1]["eps_move"] == repr((3.3 - 3.0) / 3.0)
        with open(paths["timings"], encoding="utf-8") as f:
            assert f.readline().startswith("index,primitive_t_solver_ms")
        with open(paths["summary"], encoding="utf-8") as f:
            summary = json.load(f)
        assert summary["primitive"]["solved"] == 3
        assert summary["analytic_solutions"] == 1


class TestRunner:
    def test_free_instance(self, free_scenario, config):
        outcome = run_instance(0, free_scenario, config, baseline_grid=5)
        assert outcome.result.primitive_status == "SolvedAnalytic"
        assert outcome.result.primitive_infeasible_samples == 0
        assert outcome.result.baseline_status == "Solved"
        assert outcome.result.eps_move <= 1e-6
        assert outcome.result.refined_status == "Skipped"

    def test_no_path_skips_baseline(self, vehicle, config):
        grid = load_map("cells 3 3 1\n...\n###\n...\n")
        scenario = Scenario(grid=grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(0.5, 2.5))
        outcome = run_instance(4, scenario, config, baseline_grid=5)
        assert outcome.result.primitive_status == "NoPath"
        assert outcome.result.baseline_status == "Skipped"
        assert outcome.result.eps_move is None

    @pytest.mark.slow
    def test_small_suite_in_order(self, config):
        scenarios = generate_instances(BenchmarkConfig(instances=3, seed=5))
        outcomes = run_benchmark(scenarios, config, workers=2, baseline_grid=10)
        assert [o.result.index for o in outcomes] == [0, 1, 2]
        for outcome in outcomes:
            if outcome.result.primitive_status in ("Solved", "SolvedAnalytic"):
                assert outcome.result.primitive_infeasible_samples == 0

    def test_same_seed_gives_identical_results_csv(self, config, tmp_path):
        written = []
        for run in ("first", "second"):
            scenarios = generate_instances(BenchmarkConfig(instances=2, seed=17))
            outcomes = run_benchmark(scenarios, config, workers=1, baseline_grid=5)
            paths = write_results(outcomes, str(tmp_path / run))
            with open(paths["results"], "rb") as f:
                written.append(f.read())
        assert written[0] == written[1]
