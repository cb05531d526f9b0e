"""
Derivative Check Module

Central finite differences against the analytic derivatives of an
``NlpProblem``.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from dataclasses_json import dataclass_json

from nlp.base import NlpProblem

logger = logging.getLogger(__name__)


@dataclass_json
@dataclass
class DerivativeReport:
    """Largest relative errors ``|analytic - fd| / max(1, |fd|)``."""
    objective_gradient: float
    equality_jacobian: float
    inequality_jacobian: float
    lagrangian_hessian: float

    @property
    def worst(self) -> float:
        return max(
            self.objective_gradient,
            self.equality_jacobian,
            self.inequality_jacobian,
            self.lagrangian_hessian,
        )


def _central_difference(
    fn: Callable[[np.ndarray], np.ndarray],
    z: np.ndarray,
    h: float
) -> np.ndarray:
    """Jacobian of ``fn`` at ``z``, one column per variable."""
    columns = []
    for i in range(z.size):
        step = np.zeros(z.size)
        step[i] = h
        columns.append((np.atleast_1d(fn(z + step)) - np.atleast_1d(fn(z - step))) / (2.0 * h))
    return np.stack(columns, axis=-1)


def _relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1.0, np.abs(numeric))))


def check_derivatives(
    problem: NlpProblem,
    z: np.ndarray,
    h: float = 1e-6,
    lam_eq: Optional[np.ndarray] = None,
    lam_in: Optional[np.ndarray] = None
) -> DerivativeReport:
    """
    Compare analytic derivatives with central differences at ``z``.

    The Lagrangian Hessian is checked against differences of the
    Lagrangian gradient, with unit multipliers unless given.
    """
    z = np.asarray(z, dtype=float)
    c_size = np.atleast_1d(problem.equalities(z)).size
    g_size = np.atleast_1d(problem.inequalities(z)).size
    lam_eq = np.ones(c_size) if lam_eq is None else np.asarray(lam_eq, dtype=float)
    lam_in = np.ones(g_size) if lam_in is None else np.asarray(lam_in, dtype=float)

    def lagrangian_gradient(x: np.ndarray) -> np.ndarray:
        return (
            problem.objective_gradient(x)
            - problem.equality_jacobian(x).reshape(c_size, -1).T @ lam_eq
            - problem.inequality_jacobian(x).reshape(g_size, -1).T @ lam_in
        )

    report = DerivativeReport(
        objective_gradient=_relative_error(
            problem.objective_gradient(z),
            _central_difference(lambda x: np.array([problem.objective(x)]), z, h)[0],
        ),
        equality_jacobian=_relative_error(
            problem.equality_jacobian(z).reshape(c_size, -1),
            _central_difference(problem.equalities, z, h).reshape(c_size, -1),
        ),
        inequality_jacobian=_relative_error(
            problem.inequality_jacobian(z).reshape(g_size, -1),
            _central_difference(problem.inequalities, z, h).reshape(g_size, -1),
        ),
        lagrangian_hessian=_relative_error(
            problem.lagrangian_hessian(z, lam_eq, lam_in),
            _central_difference(lagrangian_gradient, z, h),
        ),
    )
    logger.debug(f"Derivative check: {report.to_json()}")
    return report
