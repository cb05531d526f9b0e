"""Shared fixtures: the L-turn map, an empty map and their scenarios."""

import pytest

from config.config_manager import default_config
from world.map_io import load_map
from world.models import OccupancyGrid, Scenario, Vehicle

L_TURN_MAP = "cells 3 3 1\n##.\n##.\n...\n"


@pytest.fixture
def config():
    return default_config()


@pytest.fixture
def vehicle():
    return Vehicle(width=0.5, length=0.5, v_max=1.0, a_max=2.0)


@pytest.fixture
def l_grid():
    return load_map(L_TURN_MAP)


@pytest.fixture
def l_scenario(l_grid, vehicle):
    return Scenario(grid=l_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 2.75))


@pytest.fixture
def free_grid():
    return OccupancyGrid.empty(3, 3, 1.0)


@pytest.fixture
def free_scenario(free_grid, vehicle):
    return Scenario(grid=free_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 2.5))
