import numpy as np
import pytest

from baseline.transcription import (
    TranscribedOcp,
    intersample_violation_count,
    solve_baseline,
)
from corridors.builder import build_corridor_sequence
from kinematics.min_time import analytic_plan_2d
from nlp.derivatives import check_derivatives
from planner.models import PlanStatus


class TestTranscribedOcp:
    def test_layout(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        ocp = TranscribedOcp(sequence, l_scenario, grid_points=4)
        # 9 states of 4, 8 controls of 2, 2 durations
        assert ocp.n_variables == 4 * 9 + 2 * 8 + 2
        assert ocp.time_index(1) == ocp.n_variables - 1
        assert list(ocp.stage_points(1)) == [4, 5, 6, 7, 8]

    def test_rejects_empty_grid(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        with pytest.raises(ValueError):
            TranscribedOcp(sequence, l_scenario, grid_points=0)

    def test_initial_guess_meets_boundary_states(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        ocp = TranscribedOcp(sequence, l_scenario, grid_points=4)
        states = ocp.grid_states(ocp.initial_guess())
        assert states[0, :2] == pytest.approx(l_scenario.p0)
        assert states[-1, :2] == pytest.approx(l_scenario.pn)
        assert ocp.t_move(ocp.initial_guess()) > 0.0

    def test_derivatives(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        ocp = TranscribedOcp(sequence, l_scenario, grid_points=4)
        rng = np.random.default_rng(11)
        z = ocp.initial_guess() + 0.01 * rng.normal(size=ocp.n_variables)
        assert check_derivatives(ocp, z).worst < 1e-5


class TestSolveBaseline:
    def test_free_map(self, free_scenario, config):
        sequence = build_corridor_sequence(free_scenario)
        result = solve_baseline(sequence, free_scenario, grid_points=5, config=config)
        assert result.report.status == PlanStatus.SOLVED
        # Piecewise-constant control cannot beat the bang-coast-bang optimum
        assert result.report.t_move >= 2.5 - 1e-6
        p, v = result.trajectory.final_state()
        assert p == pytest.approx(free_scenario.pn, abs=1e-6)
        assert v == pytest.approx((0.0, 0.0), abs=1e-6)

    @pytest.mark.slow
    def test_l_turn(self, l_scenario, config):
        sequence = build_corridor_sequence(l_scenario)
        result = solve_baseline(sequence, l_scenario, grid_points=8, config=config)
        assert result.report.status == PlanStatus.SOLVED
        assert result.report.t_move >= 2.75 - 1e-6
        assert result.report.n_corridors == 2


class TestIntersampleViolations:
    def test_analytic_plan_inside_free_corridor(self, free_scenario):
        sequence = build_corridor_sequence(free_scenario)
        trajectory = analytic_plan_2d(free_scenario)
        assert intersample_violation_count(trajectory, sequence, free_scenario.vehicle) == 0

    def test_diagonal_cuts_the_l_turn(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        trajectory = analytic_plan_2d(l_scenario)
        assert intersample_violation_count(trajectory, sequence, l_scenario.vehicle) > 0
