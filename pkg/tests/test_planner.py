import numpy as np
import pytest

from core.constants import FEASIBILITY_TOLERANCE
from core.exceptions import MaxIterations, SolverDiverged, SolverFailure
from corridors.builder import build_corridor_sequence
from corridors.models import Corridor
from heuristics.selection import select_primitives
from kinematics.min_time import analytic_plan_2d
from nlp.problem import assemble, initial_guess
from planner import planner as planner_module
from planner.feasibility import (
    check_trajectory,
    collision_rows,
    emergency_feasibility_note,
    validate_samples,
)
from planner.models import PlanReport, PlanStatus
from planner.planner import plan, solve_with_repair
from world.map_io import load_map
from world.models import OccupancyGrid, Scenario


class TestPlanStatuses:
    def test_free_map_is_solved_analytically(self, free_scenario, config):
        result = plan(free_scenario, config)
        assert result.report.status == PlanStatus.SOLVED_ANALYTIC
        assert result.report.used_analytic
        assert result.report.t_move == pytest.approx(2.5)
        assert result.problem is None

    def test_walled_goal(self, vehicle, config):
        grid = load_map("cells 3 3 1\n...\n###\n...\n")
        scenario = Scenario(grid=grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(0.5, 2.5))
        result = plan(scenario, config)
        assert result.report.status == PlanStatus.NO_PATH
        assert result.trajectory is None
        assert result.report.message

    def test_cells_smaller_than_vehicle(self, vehicle, config):
        grid = OccupancyGrid.empty(5, 5, 0.4)
        scenario = Scenario(grid=grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(1.5, 1.5))
        result = plan(scenario, config)
        assert result.report.status == PlanStatus.DEGENERATE_INPUT

    def test_status_success_flags(self):
        assert PlanStatus.SOLVED.succeeded and PlanStatus.SOLVED_ANALYTIC.succeeded
        assert not PlanStatus.NO_PATH.succeeded


class TestLTurnPlan:
    @pytest.fixture
    def result(self, l_scenario, config):
        return plan(l_scenario, config)

    def test_solved_through_two_corridors(self, result):
        report = result.report
        assert report.status == PlanStatus.SOLVED
        assert report.n_corridors == 2
        assert not report.used_analytic
        assert report.solver_iterations > 0
        assert report.t_total >= report.t_solver > 0.0

    def test_reaches_goal_at_rest(self, result, l_scenario):
        p, v = result.trajectory.final_state()
        assert p == pytest.approx(l_scenario.pn, abs=1e-6)
        assert v == pytest.approx((0.0, 0.0), abs=1e-6)

    def test_slower_than_obstacle_free_bound(self, result, l_scenario):
        assert result.report.t_move >= analytic_plan_2d(l_scenario).t_move - 1e-9
        assert result.report.t_move <= result.report.t_move_initial + 1e-9

    def test_trajectory_stays_in_corridors(self, result, l_scenario):
        check = check_trajectory(
            result.trajectory, result.sequence, l_scenario.vehicle, 100.0, FEASIBILITY_TOLERANCE
        )
        assert check.feasible
        verdicts = validate_samples(
            result.trajectory.sample(100.0), l_scenario.grid, l_scenario.vehicle
        )
        assert all(verdict.passed for verdict in verdicts)

    def test_mirror_symmetry(self, result, l_scenario, config):
        mirrored = plan(l_scenario.mirrored_x(), config)
        assert mirrored.report.status == PlanStatus.SOLVED
        assert mirrored.report.t_move == pytest.approx(result.report.t_move, rel=1e-6)


class TestSolveWithRepair:
    def test_no_extremum_left_outside(self, l_scenario, config):
        sequence = build_corridor_sequence(l_scenario)
        selection = select_primitives(sequence, l_scenario, config)
        problem = assemble(selection, sequence, l_scenario, config)
        guess = initial_guess(selection, l_scenario, config)
        problem, solution, rounds = solve_with_repair(problem, guess, config)
        assert 0 <= rounds <= config["max_repair_rounds"]
        assert problem.extremum_violations(solution, 1e-8) == []


class TestEmergencyNote:
    @pytest.fixture
    def moving_scenario(self, free_grid, vehicle):
        return Scenario(grid=free_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 2.5), v0=(1.0, 0.0))

    def test_braking_fits_exactly(self, moving_scenario):
        # v^2 / 2a = 0.25 and the inflated corridor ends 0.25 m ahead
        corridor = Corridor.from_bounds(0.0, 1.0, 0.0, 1.0)
        assert emergency_feasibility_note(moving_scenario, corridor)

    def test_braking_overruns(self, moving_scenario):
        corridor = Corridor.from_bounds(0.0, 0.95, 0.0, 1.0)
        assert not emergency_feasibility_note(moving_scenario, corridor)

    def test_at_rest(self, moving_scenario):
        corridor = Corridor.from_bounds(0.0, 1.0, 0.0, 1.0)
        assert emergency_feasibility_note(moving_scenario, corridor, velocity=(0.0, 0.0))


class TestValidateSamples:
    def test_feasible_plan_passes(self, free_scenario):
        samples = analytic_plan_2d(free_scenario).sample(50.0)
        verdicts = validate_samples(samples, free_scenario.grid, free_scenario.vehicle)
        assert [v.name for v in verdicts] == ["collision", "bounds", "continuity"]
        assert all(v.passed for v in verdicts)

    def test_diagonal_through_wall_collides(self, l_scenario):
        samples = analytic_plan_2d(l_scenario).sample(50.0)
        collision, bounds, continuity = validate_samples(
            samples, l_scenario.grid, l_scenario.vehicle
        )
        assert not collision.passed and collision.first_row > 0
        assert bounds.passed and continuity.passed

    def test_speed_spike(self, free_scenario):
        samples = analytic_plan_2d(free_scenario).sample(50.0)
        samples.v[10, 0] = 5.0
        _, bounds, continuity = validate_samples(
            samples, free_scenario.grid, free_scenario.vehicle
        )
        assert not bounds.passed and bounds.first_row == 10
        assert bounds.failures == 1
        assert bounds.first_time == pytest.approx(samples.t[10])
        assert not continuity.passed
        assert "FAIL (1 samples, first at row 10" in bounds.describe()

    def test_time_going_backwards(self, free_scenario):
        samples = analytic_plan_2d(free_scenario).sample(50.0)
        samples.t[20] = samples.t[18]
        *_, continuity = validate_samples(samples, free_scenario.grid, free_scenario.vehicle)
        assert not continuity.passed

    def test_contact_within_tolerance_is_free(self, l_grid, vehicle):
        samples = analytic_plan_2d(
            Scenario(grid=l_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 0.5))
        ).sample(10.0)
        samples.p[:, 1] = 0.75 + 1e-8
        assert collision_rows(samples, l_grid, vehicle) == []
        samples.p[:, 1] = 0.8
        assert collision_rows(samples, l_grid, vehicle) != []


class _StubProblem:
    def __init__(self, t_move, coasting=()):
        self._t_move = t_move
        self._coasting = list(coasting)
        self.sequence = None
        self.scenario = None
        self.extremum_constraints = ()

    def coasting_waypoints(self, z, eps):
        return self._coasting

    def t_move(self, z):
        return self._t_move


class TestFlipLoop:
    @pytest.fixture
    def selection(self, l_scenario, config):
        return select_primitives(build_corridor_sequence(l_scenario), l_scenario, config)

    def _run(self, monkeypatch, selection, config, candidate_t_move=None, failure=None):
        """Run the flip loop on a stub problem coasting through waypoint 1."""
        calls = {"assembled": [], "guesses": []}
        candidate = _StubProblem(candidate_t_move)
        candidate_solution = np.array([2.0])

        def fake_assemble(flipped, *args, **kwargs):
            calls["assembled"].append(flipped)
            return candidate

        def fake_solve(problem, guess, config, budget=None):
            calls["guesses"].append(guess)
            if failure is not None:
                raise failure
            return problem, candidate_solution, 0

        monkeypatch.setattr(planner_module, "assemble", fake_assemble)
        monkeypatch.setattr(planner_module, "solve_with_repair", fake_solve)
        original = _StubProblem(3.0, coasting=[1])
        solution = np.array([1.0])
        report = PlanReport()
        out = planner_module._flip_loop(
            original, solution, selection, config, planner_module._SolveBudget(), report
        )
        return out, calls, report, original, solution, candidate

    def test_strict_improvement_is_accepted(self, monkeypatch, selection, config):
        (problem, solution, flipped), calls, report, _, previous, candidate = self._run(
            monkeypatch, selection, config, candidate_t_move=2.9
        )
        assert problem is candidate
        assert solution[0] == 2.0
        assert flipped.signs[1] == (-selection.signs[1][0], -selection.signs[1][1])
        assert report.n_flip_rounds == 1
        # The flipped problem is warm-started from the previous solution
        assert calls["guesses"][0] is previous

    def test_equal_time_is_rejected(self, monkeypatch, selection, config):
        (problem, solution, kept), _, report, original, previous, _ = self._run(
            monkeypatch, selection, config, candidate_t_move=3.0 - 1e-12
        )
        assert problem is original and solution is previous
        assert kept is selection
        assert report.n_flip_rounds == 0

    def test_failed_flip_keeps_previous_solution(self, monkeypatch, selection, config):
        (problem, solution, kept), _, report, original, previous, _ = self._run(
            monkeypatch, selection, config, failure=SolverFailure("stalled")
        )
        assert problem is original and solution is previous
        assert kept is selection
        assert report.n_flip_rounds == 0

    def test_disabled_flips_never_assemble(self, monkeypatch, selection, config):
        _, calls, report, _, _, _ = self._run(
            monkeypatch, selection, {**config, "max_flip_rounds": 0}, candidate_t_move=1.0
        )
        assert calls["assembled"] == []
        assert report.n_flip_rounds == 0

    def test_flips_never_slow_the_plan_down(self, l_scenario, config):
        without = plan(l_scenario, {**config, "max_flip_rounds": 0})
        with_flips = plan(l_scenario, config)
        assert with_flips.report.t_move_initial == without.report.t_move_initial
        assert with_flips.report.t_move <= without.report.t_move + 1e-12


class TestSolverFailureReport:
    def test_last_iterate_is_kept(self, monkeypatch, l_scenario, config):
        def stalled(problem, guess, config=None):
            raise MaxIterations("cap reached", last_iterate=guess)

        monkeypatch.setattr(planner_module, "solve", stalled)
        result = plan(l_scenario, config)
        assert result.report.status == PlanStatus.SOLVER_FAILURE
        assert result.trajectory is not None
        assert result.solution is not None
        assert result.report.t_move == pytest.approx(result.problem.t_move(result.solution))
        assert result.report.t_move > 0.0

    def test_non_finite_iterate_is_dropped(self, monkeypatch, l_scenario, config):
        def diverged(problem, guess, config=None):
            raise SolverDiverged("nan", last_iterate=np.full_like(guess, np.nan))

        monkeypatch.setattr(planner_module, "solve", diverged)
        result = plan(l_scenario, config)
        assert result.report.status == PlanStatus.SOLVER_FAILURE
        assert result.trajectory is None


class TestDeterminism:
    def test_identical_plans_write_identical_files(self, l_scenario, config, tmp_path):
        texts = []
        for run in ("a", "b"):
            result = plan(l_scenario, config)
            path = tmp_path / f"{run}.csv"
            result.trajectory.write_csv(str(path), 100.0)
            texts.append((path.read_bytes(), result.trajectory.to_pieces_export()))
        assert texts[0] == texts[1]
