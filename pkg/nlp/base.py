"""
NLP Base Module

The interface shared by every problem handed to the SQP solver.

Problems have the form::

    minimize    f(z)
    subject to  c(z) = 0
                g(z) >= 0

and the Lagrangian is ``L = f - lam_eq . c - lam_in . g`` with
``lam_in >= 0``.
"""

from typing import Protocol

import numpy as np


class NlpProblem(Protocol):
    """Dense smooth nonlinear program with exact first derivatives."""

    @property
    def n_variables(self) -> int:
        ...

    def objective(self, z: np.ndarray) -> float:
        ...

    def objective_gradient(self, z: np.ndarray) -> np.ndarray:
        ...

    def equalities(self, z: np.ndarray) -> np.ndarray:
        ...

    def equality_jacobian(self, z: np.ndarray) -> np.ndarray:
        ...

    def inequalities(self, z: np.ndarray) -> np.ndarray:
        ...

    def inequality_jacobian(self, z: np.ndarray) -> np.ndarray:
        ...

    def lagrangian_hessian(
        self,
        z: np.ndarray,
        lam_eq: np.ndarray,
        lam_in: np.ndarray
    ) -> np.ndarray:
        ...


def constraint_violation(problem: NlpProblem, z: np.ndarray) -> float:
    """Largest equality residual or inequality violation at ``z``."""
    worst = 0.0
    c = problem.equalities(z)
    if c.size:
        worst = max(worst, float(np.max(np.abs(c))))
    g = problem.inequalities(z)
    if g.size:
        worst = max(worst, float(np.max(-g, initial=0.0)))
    return worst
