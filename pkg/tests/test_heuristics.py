import pytest

from core.geometry import Box
from corridors.builder import build_corridor_sequence
from corridors.models import Corridor, CorridorSequence
from heuristics.selection import (
    PrimitiveSelection,
    candidate_waypoints,
    flip_sign,
    free_axes,
    select_primitives,
    select_signs,
    select_waypoints,
    straight_line_clear,
)
from world.models import OccupancyGrid, Scenario


class TestWaypoints:
    def test_l_turn_waypoint_hugs_inner_corner(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        assert select_waypoints(sequence, l_scenario) == [(2.25, 0.75)]

    def test_waypoint_does_not_depend_on_mu(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        low = select_waypoints(sequence, l_scenario, 20.0)
        high = select_waypoints(sequence, l_scenario, 200.0)
        assert low == high == [(2.25, 0.75)]

    def test_selection_does_not_depend_on_mu(self, l_scenario, config):
        sequence = build_corridor_sequence(l_scenario)
        low = select_primitives(sequence, l_scenario, {**config, "mu": 20.0})
        high = select_primitives(sequence, l_scenario, {**config, "mu": 200.0})
        assert (low.waypoints, low.signs) == (high.waypoints, high.signs)

    def test_mirrored_waypoint(self, l_scenario):
        mirrored = l_scenario.mirrored_x()
        sequence = build_corridor_sequence(mirrored)
        assert select_waypoints(sequence, mirrored) == [(0.75, 0.75)]

    def test_candidates_are_shrunken_corners(self, vehicle):
        overlap = Box(2.0, 3.0, 0.0, 1.0)
        adjacent = (Box(0.0, 3.0, 0.0, 1.0), Box(2.0, 3.0, 0.0, 3.0))
        assert candidate_waypoints(overlap, adjacent, vehicle.half_extent) == [
            (2.25, 0.25), (2.75, 0.25), (2.25, 0.75), (2.75, 0.75)
        ]

    def test_deep_corners_are_filtered(self, vehicle):
        overlap = Box(1.0, 3.0, 0.0, 2.0)
        adjacent = (Box(0.0, 3.0, 0.0, 2.0), Box(1.0, 4.0, 0.0, 4.0))
        candidates = candidate_waypoints(overlap, adjacent, vehicle.half_extent)
        assert (2.75, 1.75) not in candidates
        assert (1.25, 0.25) in candidates


class TestSigns:
    def test_l_turn_signs(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        waypoints = [l_scenario.p0, (2.25, 0.75), l_scenario.pn]
        assert select_signs(waypoints, sequence) == [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)]

    def test_mirrored_signs(self, l_scenario):
        mirrored = l_scenario.mirrored_x()
        sequence = build_corridor_sequence(mirrored)
        waypoints = [mirrored.p0, (0.75, 0.75), mirrored.pn]
        assert select_signs(waypoints, sequence)[1] == (1.0, 1.0)

    def test_flip_sign_copies(self):
        selection = PrimitiveSelection(
            waypoints=[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)],
            signs=[(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)],
        )
        flipped = flip_sign(selection, 1)
        assert flipped.signs[1] == (1.0, -1.0)
        assert selection.signs[1] == (-1.0, 1.0)


class TestStraightLine:
    def test_blocked_diagonal(self, l_scenario):
        sequence = build_corridor_sequence(l_scenario)
        assert not straight_line_clear(
            l_scenario.p0, l_scenario.pn, sequence.boxes(), l_scenario.vehicle, 200
        )

    def test_straight_corridor_releases_waypoint(self, vehicle):
        grid = OccupancyGrid.empty(2, 6, 1.0)
        scenario = Scenario(grid=grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(5.5, 0.5))
        sequence = CorridorSequence([
            Corridor.from_bounds(0.0, 4.0, 0.0, 1.0),
            Corridor.from_bounds(3.0, 6.0, 0.0, 2.0),
        ])
        selection = select_primitives(sequence, scenario, {"mu": 20.0, "straight_line_samples": 50})
        assert selection.movable == [False, True, False]
        bounds = selection.delta_bounds[1]
        x, y = selection.waypoints[1]
        assert Box(3.25, 3.75, 0.25, 0.75).translate(-x, -y) == bounds


class TestFreeAxes:
    def test_l_turn(self, l_scenario):
        waypoints = [l_scenario.p0, (2.25, 0.75), l_scenario.pn]
        # First segment moves 1.75 in x and 0.25 in y; last 0.25 in x and 2.0 in y
        assert free_axes(waypoints, l_scenario) == (1, 0)

    def test_ties_pick_x(self, free_scenario):
        waypoints = [free_scenario.p0, free_scenario.pn]
        assert free_axes(waypoints, free_scenario) == (0, 0)


class TestSelectPrimitives:
    def test_l_turn_selection(self, l_scenario, config):
        sequence = build_corridor_sequence(l_scenario)
        selection = select_primitives(sequence, l_scenario, config)
        assert selection.n_primitives == 2
        assert selection.waypoints == [(0.5, 0.5), (2.25, 0.75), (2.5, 2.75)]
        assert selection.signs[1] == (-1.0, 1.0)
        assert selection.movable_indices() == []
        assert selection.mu == pytest.approx(config["mu"])

    def test_single_corridor(self, free_scenario, config):
        sequence = build_corridor_sequence(free_scenario)
        selection = select_primitives(sequence, free_scenario, config)
        assert selection.waypoints == [(0.5, 0.5), (2.5, 2.5)]
        assert selection.n_primitives == 1
