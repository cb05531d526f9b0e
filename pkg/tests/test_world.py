import json

import numpy as np
import pytest

from core.exceptions import OutOfBounds, ParseError, ValidationError
from world.map_io import (
    dump_scenario,
    load_map,
    load_scenario,
    parse_vehicle_spec,
    read_scenario_file,
    serialize_map,
)
from world.models import OccupancyGrid, Scenario, Vehicle, occupied_cells

from tests.conftest import L_TURN_MAP


class TestLoadMap:
    def test_last_line_is_row_zero(self, l_grid):
        assert (l_grid.rows, l_grid.cols, l_grid.cell_size) == (3, 3, 1.0)
        assert not l_grid.occupied[0].any()
        assert l_grid.occupied[2, 0] and l_grid.occupied[1, 1]
        assert l_grid.is_free((2, 2))
        assert l_grid.occupied_count() == 4

    def test_serialize_is_inverse(self, l_grid):
        assert serialize_map(l_grid) == L_TURN_MAP
        assert load_map(serialize_map(l_grid)) == l_grid

    @pytest.mark.parametrize("text", [
        "cells 1 1 1.0\n.\n",
        "cells 3 2 0.3333333\n.#\n..\n#.\n",
        "cells 2 2 2.50\n..\n.#\n",
    ])
    def test_header_cell_size_is_kept_verbatim(self, text):
        grid = load_map(text)
        assert serialize_map(grid) == text
        assert serialize_map(grid.mirrored_x()).splitlines()[0] == text.splitlines()[0]

    def test_seven_digit_cell_size_keeps_extent(self):
        grid = load_map("cells 3 3 0.3333333\n...\n...\n...\n")
        again = load_map(serialize_map(grid))
        assert again.cell_size == 0.3333333
        assert again.extent.x_max == grid.extent.x_max

    def test_generated_grid_prints_exact_cell_size(self):
        grid = OccupancyGrid.empty(1, 2, 1.0 / 3.0)
        text = serialize_map(grid)
        assert text.splitlines()[0] == f"cells 1 2 {1.0 / 3.0!r}"
        assert load_map(text).cell_size == grid.cell_size

    def test_cell_size_text_must_match(self):
        with pytest.raises(ValidationError):
            OccupancyGrid(1, 1, 1.0, np.zeros((1, 1), dtype=bool), cell_size_text="2")

    def test_bad_header(self):
        with pytest.raises(ParseError) as info:
            load_map("grid 3 3 1\n...\n...\n...\n")
        assert info.value.line == 1

    def test_short_row_reports_line(self):
        with pytest.raises(ParseError) as info:
            load_map("cells 2 3 1\n...\n..\n")
        assert info.value.line == 3

    def test_unknown_symbol(self):
        with pytest.raises(ParseError) as info:
            load_map("cells 1 3 1\n.x.\n")
        assert info.value.line == 2

    def test_missing_rows(self):
        with pytest.raises(ParseError):
            load_map("cells 3 3 1\n...\n")


class TestOccupancy:
    def test_vehicle_filling_a_cell_occupies_one_cell(self, free_grid):
        vehicle = Vehicle(1.0, 1.0, 1.0, 1.0)
        assert occupied_cells((1.5, 1.5), vehicle, free_grid) == {(1, 1)}

    def test_straddling_footprint(self, free_grid, vehicle):
        assert occupied_cells((1.0, 0.5), vehicle, free_grid) == {(0, 0), (0, 1)}
        assert occupied_cells((1.0, 1.0), vehicle, free_grid) == {
            (0, 0), (0, 1), (1, 0), (1, 1)
        }

    def test_leaving_the_grid_raises(self, free_grid, vehicle):
        with pytest.raises(OutOfBounds):
            occupied_cells((0.1, 0.5), vehicle, free_grid)

    def test_cell_of_and_cell_box(self, l_grid):
        assert l_grid.cell_of((2.5, 0.5)) == (0, 2)
        box = l_grid.cell_box((0, 2))
        assert (box.x_min, box.x_max, box.y_min, box.y_max) == (2.0, 3.0, 0.0, 1.0)

    def test_mirrored_grid(self, l_grid):
        mirrored = l_grid.mirrored_x()
        assert serialize_map(mirrored) == "cells 3 3 1\n.##\n.##\n...\n"
        assert np.array_equal(mirrored.mirrored_x().occupied, l_grid.occupied)


class TestScenario:
    def test_valid(self, l_scenario):
        l_scenario.validate()

    def test_start_on_obstacle(self, l_grid, vehicle):
        scenario = Scenario(grid=l_grid, vehicle=vehicle, p0=(0.5, 2.5), pn=(2.5, 2.75))
        with pytest.raises(ValidationError):
            scenario.validate()

    def test_initial_velocity_bound(self, l_grid, vehicle):
        scenario = Scenario(
            grid=l_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 2.75), v0=(1.5, 0.0)
        )
        with pytest.raises(ValidationError):
            scenario.validate()

    def test_vehicle_must_be_positive(self):
        with pytest.raises(ValidationError):
            Vehicle(0.0, 0.5, 1.0, 1.0)

    def test_mirrored_scenario(self, l_scenario):
        mirrored = l_scenario.mirrored_x()
        assert mirrored.p0 == (2.5, 0.5)
        assert mirrored.pn == (0.5, 2.75)
        mirrored.validate()


class TestScenarioFiles:
    def test_inline_map(self, l_scenario):
        loaded = load_scenario(dump_scenario(l_scenario))
        assert loaded.grid == l_scenario.grid
        assert loaded.vehicle == l_scenario.vehicle
        assert loaded.p0 == l_scenario.p0 and loaded.pn == l_scenario.pn

    def test_relative_map_path(self, tmp_path):
        (tmp_path / "l.map").write_text(L_TURN_MAP, encoding="utf-8")
        scenario_path = tmp_path / "scenario.json"
        scenario_path.write_text(json.dumps({
            "map": "l.map",
            "vehicle": {"W": 0.5, "L": 0.5, "v_max": 1.0, "a_max": 2.0},
            "start": {"p": [0.5, 0.5]},
            "goal": {"p": [2.5, 2.75]},
        }), encoding="utf-8")
        scenario = read_scenario_file(str(scenario_path))
        assert scenario.v0 == (0.0, 0.0)
        assert scenario.grid.occupied_count() == 4

    def test_missing_key(self):
        with pytest.raises(ParseError):
            load_scenario(json.dumps({"map": L_TURN_MAP}))

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            load_scenario("{not json")

    def test_scenario_outside_grid_is_rejected(self):
        text = json.dumps({
            "map": L_TURN_MAP,
            "vehicle": {"W": 0.5, "L": 0.5, "v_max": 1.0, "a_max": 2.0},
            "start": {"p": [0.1, 0.5]},
            "goal": {"p": [2.5, 2.75]},
        })
        with pytest.raises(ValidationError):
            load_scenario(text)


class TestVehicleSpec:
    def test_parse(self):
        assert parse_vehicle_spec("0.5, 0.4,1,2") == Vehicle(0.5, 0.4, 1.0, 2.0)

    @pytest.mark.parametrize("text", ["0.5,0.5,1", "a,b,c,d"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_vehicle_spec(text)

    def test_empty_grid_helper(self):
        grid = OccupancyGrid.empty(2, 4, 0.5)
        assert grid.extent.x_max == 2.0 and grid.extent.y_max == 1.0
        assert grid.occupied_count() == 0
