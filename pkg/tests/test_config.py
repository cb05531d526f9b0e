import logging

import pytest

from config import config_manager
from config.config_manager import (
    _load_bench_config,
    _load_planner_config,
    _load_solver_config,
    default_config,
    get_config,
)
from core.constants import DEFAULT_MU, SLACK_WEIGHT
from logging_config import setup_logging


class TestDefaults:
    def test_default_values(self):
        config = default_config()
        assert config["sample_rate"] == 100.0
        assert config["mu"] == 20.0
        assert config["max_repair_rounds"] == 5
        assert config["max_flip_rounds"] == 3
        assert config["nlp_hessian"] == "exact"
        assert config["nlp_constraint_tolerance"] == 1e-9
        assert config["baseline_grid_points"] == 30
        assert (config["bench_rows"], config["bench_cols"]) == (8, 10)
        assert config["log_file"] is None

    def test_planner_defaults_follow_constants(self):
        config = _load_planner_config({})
        assert config["mu"] == DEFAULT_MU
        assert config["slack_weight"] == SLACK_WEIGHT
        assert _load_planner_config({"PLANNER_MU": "-3"})["mu"] == DEFAULT_MU


class TestParsing:
    def test_inline_comment_is_ignored(self):
        assert _load_planner_config({"PLANNER_MU": "35  # corner weight"})["mu"] == 35.0

    def test_invalid_number_falls_back(self):
        assert _load_planner_config({"PLANNER_MU": "lots"})["mu"] == 20.0

    def test_out_of_range_falls_back(self):
        config = _load_planner_config({"PLANNER_INITIAL_TAU_MIN": "0.01"})
        assert config["initial_tau_min"] == 0.06
        assert _load_bench_config({"BENCH_DENSITY": "1.0"})["bench_density"] == 0.1

    def test_zero_repair_rounds_allowed(self):
        assert _load_planner_config({"PLANNER_MAX_REPAIR_ROUNDS": "0"})["max_repair_rounds"] == 0
        assert _load_planner_config({"PLANNER_MAX_REPAIR_ROUNDS": "-1"})["max_repair_rounds"] == 5

    def test_hessian_mode(self):
        assert _load_solver_config({"NLP_HESSIAN": "BFGS"})["nlp_hessian"] == "bfgs"
        assert _load_solver_config({"NLP_HESSIAN": "newton"})["nlp_hessian"] == "exact"

    def test_get_config_reads_environment(self, monkeypatch):
        monkeypatch.setattr(config_manager, "_cached_config", None)
        monkeypatch.setenv("BASELINE_GRID_POINTS", "12")
        config = get_config(force_reload=True)
        assert config["baseline_grid_points"] == 12
        assert get_config() is config


class TestLogging:
    @pytest.fixture(autouse=True)
    def restore_root_handlers(self):
        root = logging.getLogger()
        handlers, level = root.handlers[:], root.level
        yield
        for handler in root.handlers:
            if handler not in handlers:
                handler.close()
        root.handlers[:] = handlers
        root.setLevel(level)

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            setup_logging("LOUD")

    def test_file_handlers(self, tmp_path):
        log_file = tmp_path / "logs" / "planner_{timestamp}.log"
        warnings_file = tmp_path / "logs" / "warnings.log"
        setup_logging("debug", str(log_file), str(warnings_file))
        logging.getLogger("tests").warning("corridor check")
        for handler in logging.getLogger().handlers:
            handler.flush()
        written = [p.name for p in (tmp_path / "logs").iterdir()]
        assert any(name.startswith("planner_") and "{" not in name for name in written)
        assert "corridor check" in warnings_file.read_text(encoding="utf-8")
        assert logging.getLogger().level == logging.DEBUG
