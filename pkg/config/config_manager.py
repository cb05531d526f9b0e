"""
Configuration Manager Module

This module handles loading and managing configuration for the application.
It loads environment variables (optionally from a .env file) and provides a
flat configuration dictionary shared by the planner, the solver, the
baseline and the benchmark tooling.
"""

import os
import logging
from typing import Dict, Any, Optional

from dotenv import load_dotenv

from core.constants import DEFAULT_MU, SLACK_WEIGHT

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Cache for storing the loaded configuration
_cached_config: Optional[Dict[str, Any]] = None

HESSIAN_MODES = ("exact", "bfgs")


def get_config(force_reload: bool = False) -> Dict[str, Any]:
    """
    Load configuration from environment variables.

    Args:
        force_reload: If True, force reload the configuration even if cached.

    Returns:
        A dictionary containing the application configuration.
    """
    global _cached_config

    # If we have a cached config and don't need to force reload, use it
    if _cached_config is not None and not force_reload:
        return _cached_config

    logger.info("Loading application configuration")
    load_dotenv()

    config = {
        **_load_planner_config(),
        **_load_solver_config(),
        **_load_baseline_config(),
        **_load_bench_config(),
        **_load_logging_config(),
    }

    logger.info(
        f"Configuration loaded successfully. Sample rate: "
        f"{config['sample_rate']} Hz, solver: SQP ({config['nlp_hessian']} "
        f"Hessian), baseline grid: {config['baseline_grid_points']}"
    )

    _cached_config = config
    return config


def default_config() -> Dict[str, Any]:
    """
    Return the configuration built from defaults only, ignoring the
    environment. Used by tests and by worker processes that must not depend
    on the caller's environment.

    Returns:
        Configuration dictionary with default values
    """
    return {
        **_load_planner_config({}),
        **_load_solver_config({}),
        **_load_baseline_config({}),
        **_load_bench_config({}),
        **_load_logging_config({}),
    }


def _env(env_vars: Optional[Dict[str, str]]) -> Dict[str, str]:
    return dict(os.environ) if env_vars is None else env_vars


def _load_planner_config(
    env_vars: Optional[Dict[str, str]] = None
) -> Dict[str, Any]:
    """
    Load planner settings.

    Args:
        env_vars: Environment mapping (defaults to os.environ)

    Returns:
        Dictionary with planner configuration
    """
    env = _env(env_vars)
    return {
        "sample_rate": _parse_positive_float(
            env.get("PLANNER_SAMPLE_RATE", "100"), "PLANNER_SAMPLE_RATE", 100.0
        ),
        "mu": _parse_positive_float(
            env.get("PLANNER_MU", repr(DEFAULT_MU)), "PLANNER_MU", DEFAULT_MU
        ),
        "slack_weight": _parse_positive_float(
            env.get("PLANNER_SLACK_WEIGHT", repr(SLACK_WEIGHT)),
            "PLANNER_SLACK_WEIGHT",
            SLACK_WEIGHT,
        ),
        "coast_epsilon": _parse_float_range(
            env.get("PLANNER_COAST_EPSILON", "1e-4"),
            "PLANNER_COAST_EPSILON",
            1e-4,
            0.0,
            1.0
        ),
        "max_repair_rounds": _parse_non_negative_int(
            env.get("PLANNER_MAX_REPAIR_ROUNDS", "5"),
            "PLANNER_MAX_REPAIR_ROUNDS",
            5
        ),
        "max_flip_rounds": _parse_non_negative_int(
            env.get("PLANNER_MAX_FLIP_ROUNDS", "3"),
            "PLANNER_MAX_FLIP_ROUNDS",
            3
        ),
        "straight_line_samples": _parse_positive_int(
            env.get("PLANNER_STRAIGHT_LINE_SAMPLES", "200"),
            "PLANNER_STRAIGHT_LINE_SAMPLES",
            200
        ),
        "initial_tau_min": _parse_float_range(
            env.get("PLANNER_INITIAL_TAU_MIN", "0.06"),
            "PLANNER_INITIAL_TAU_MIN",
            0.06,
            0.05,
            10.0
        ),
    }


def _load_solver_config(
    env_vars: Optional[Dict[str, str]] = None
) -> Dict[str, Any]:
    """
    Load SQP solver settings.

    Args:
        env_vars: Environment mapping (defaults to os.environ)

    Returns:
        Dictionary with solver configuration
    """
    env = _env(env_vars)
    hessian = env.get("NLP_HESSIAN", "exact").split('#')[0].strip().lower()
    if hessian not in HESSIAN_MODES:
        logger.warning(
            f"Invalid NLP_HESSIAN value: '{hessian}'. Expected one of "
            f"{HESSIAN_MODES}, defaulting to 'exact'"
        )
        hessian = "exact"

    return {
        "nlp_max_iterations": _parse_positive_int(
            env.get("NLP_MAX_ITERATIONS", "200"), "NLP_MAX_ITERATIONS", 200
        ),
        "nlp_tolerance": _parse_float_range(
            env.get("NLP_TOLERANCE", "1e-6"), "NLP_TOLERANCE", 1e-6, 1e-14, 1e-2
        ),
        "nlp_constraint_tolerance": _parse_float_range(
            env.get("NLP_CONSTRAINT_TOLERANCE", "1e-9"),
            "NLP_CONSTRAINT_TOLERANCE",
            1e-9,
            1e-14,
            1e-2
        ),
        "nlp_hessian": hessian,
    }


def _load_baseline_config(
    env_vars: Optional[Dict[str, str]] = None
) -> Dict[str, Any]:
    """
    Load transcription baseline settings.

    Args:
        env_vars: Environment mapping (defaults to os.environ)

    Returns:
        Dictionary with baseline configuration
    """
    env = _env(env_vars)
    return {
        "baseline_grid_points": _parse_positive_int(
            env.get("BASELINE_GRID_POINTS", "30"), "BASELINE_GRID_POINTS", 30
        ),
    }


def _load_bench_config(
    env_vars: Optional[Dict[str, str]] = None
) -> Dict[str, Any]:
    """
    Load benchmark generation defaults.

    Args:
        env_vars: Environment mapping (defaults to os.environ)

    Returns:
        Dictionary with benchmark configuration
    """
    env = _env(env_vars)
    return {
        "bench_rows": _parse_positive_int(
            env.get("BENCH_ROWS", "8"), "BENCH_ROWS", 8
        ),
        "bench_cols": _parse_positive_int(
            env.get("BENCH_COLS", "10"), "BENCH_COLS", 10
        ),
        "bench_cell_size": _parse_positive_float(
            env.get("BENCH_CELL_SIZE", "0.5"), "BENCH_CELL_SIZE", 0.5
        ),
        "bench_vehicle_size": _parse_positive_float(
            env.get("BENCH_VEHICLE_SIZE", "0.4"), "BENCH_VEHICLE_SIZE", 0.4
        ),
        "bench_density": _parse_float_range(
            env.get("BENCH_DENSITY", "0.1"), "BENCH_DENSITY", 0.1, 0.0, 0.999
        ),
        "bench_instances": _parse_positive_int(
            env.get("BENCH_INSTANCES", "100"), "BENCH_INSTANCES", 100
        ),
    }


def _load_logging_config(
    env_vars: Optional[Dict[str, str]] = None
) -> Dict[str, Any]:
    """
    Load logging settings.

    Args:
        env_vars: Environment mapping (defaults to os.environ)

    Returns:
        Dictionary with logging configuration
    """
    env = _env(env_vars)
    return {
        "log_level": env.get("LOG_LEVEL", "INFO").split('#')[0].strip(),
        "log_file": env.get("LOG_FILE") or None,
    }


def _parse_positive_int(
    value: str,
    name: str,
    default: int
) -> int:
    """
    Parse a string as a positive integer.

    Args:
        value: String to parse
        name: Parameter name for logging
        default: Default value if parsing fails

    Returns:
        Parsed positive integer
    """
    try:
        result = int(value.split('#')[0].strip())
        if result <= 0:
            logger.warning(
                f"{name} must be positive, defaulting to {default}"
            )
            return default
        return result
    except ValueError:
        logger.error(f"Invalid {name} value, defaulting to {default}")
        return default


def _parse_non_negative_int(
    value: str,
    name: str,
    default: int
) -> int:
    """
    Parse a string as a non-negative integer.

    Args:
        value: String to parse
        name: Parameter name for logging
        default: Default value if parsing fails

    Returns:
        Parsed non-negative integer
    """
    try:
        result = int(value.split('#')[0].strip())
        if result < 0:
            logger.warning(
                f"{name} must be non-negative, defaulting to {default}"
            )
            return default
        return result
    except ValueError:
        logger.error(f"Invalid {name} value, defaulting to {default}")
        return default


def _parse_positive_float(
    value: str,
    name: str,
    default: float
) -> float:
    """
    Parse a string as a strictly positive float.

    Args:
        value: String to parse
        name: Parameter name for logging
        default: Default value if parsing fails

    Returns:
        Parsed positive float
    """
    try:
        result = float(value.split('#')[0].strip())
        if result <= 0:
            logger.warning(
                f"{name} must be positive, defaulting to {default}"
            )
            return default
        return result
    except ValueError:
        logger.error(f"Invalid {name} value, defaulting to {default}")
        return default


def _parse_float_range(
    value: str,
    name: str,
    default: float,
    min_val: float,
    max_val: float
) -> float:
    """
    Parse a string as a float within a specific range.

    Args:
        value: String to parse
        name: Parameter name for logging
        default: Default value if parsing fails
        min_val: Minimum allowed value
        max_val: Maximum allowed value

    Returns:
        Parsed float within range
    """
    try:
        result = float(value.split('#')[0].strip())
        if not (min_val <= result <= max_val):
            logger.warning(
                f"{name} should be between {min_val} and {max_val}, "
                f"defaulting to {default}"
            )
            return default
        return result
    except ValueError:
        logger.error(f"Invalid {name} value, defaulting to {default}")
        return default
