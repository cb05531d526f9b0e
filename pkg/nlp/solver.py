"""
SQP Solver Module

Dense sequential quadratic programming for the small problems produced by
the planner and the transcription baseline.

Each iteration solves a convex QP sub-problem with ``quadprog`` using either
the exact Lagrangian Hessian (shifted until positive definite) or a damped
BFGS approximation. If the linearized constraints are inconsistent the
sub-problem is re-solved in elastic form. Steps are globalized with an l1
exact-penalty merit function, Armijo backtracking and a second-order
correction.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import quadprog
from dataclasses_json import dataclass_json

from config.config_manager import get_config
from core.exceptions import MaxIterations, SolverDiverged, SolverFailure
from nlp.base import NlpProblem

logger = logging.getLogger(__name__)

ARMIJO_FACTOR: float = 1e-4
BACKTRACK_FACTOR: float = 0.5
MIN_STEP_LENGTH: float = 1e-10

# Initial and growth values of the diagonal shift making the Hessian convex
_SHIFT_START: float = 1e-6
_SHIFT_GROWTH: float = 10.0
_SHIFT_FLOOR: float = 1e-8

# Gradient rows smaller than this are left out of the QP sub-problem
_ZERO_ROW: float = 1e-14

_ELASTIC_MIN_WEIGHT: float = 100.0
_ELASTIC_REGULARIZATION: float = 1e-8

# A vanishing step counts as converged only within this multiple of the KKT tolerance
_STALL_KKT_FACTOR: float = 1e3


@dataclass_json
@dataclass
class SolveStats:
    """
    Attributes:
        iterations: SQP iterations performed
        wall_time: Seconds spent in the solver (monotonic clock)
        status: "converged" or the failure kind
        objective: Objective value at the returned point
        primal_residual: Largest constraint violation at the returned point
        stationarity: Infinity norm of the Lagrangian gradient
        complementarity: Largest |multiplier * inequality value|
        elastic_steps: Iterations that needed the elastic sub-problem
        second_order_corrections: Accepted second-order correction steps
        hessian: "exact" or "bfgs"
    """
    iterations: int = 0
    wall_time: float = 0.0
    status: str = "running"
    objective: float = math.nan
    primal_residual: float = math.inf
    stationarity: float = math.inf
    complementarity: float = math.inf
    elastic_steps: int = 0
    second_order_corrections: int = 0
    hessian: str = "exact"


@dataclass
class _Linearization:
    f: float
    g: np.ndarray
    c: np.ndarray
    jc: np.ndarray
    h: np.ndarray
    jh: np.ndarray

    @property
    def violation(self) -> float:
        """l1 constraint violation."""
        return float(np.sum(np.abs(self.c)) + np.sum(np.maximum(0.0, -self.h)))

    @property
    def primal_residual(self) -> float:
        worst = float(np.max(np.abs(self.c), initial=0.0))
        return max(worst, float(np.max(-self.h, initial=0.0)))

    def finite(self) -> bool:
        return bool(
            math.isfinite(self.f)
            and np.all(np.isfinite(self.g))
            and np.all(np.isfinite(self.c))
            and np.all(np.isfinite(self.jc))
            and np.all(np.isfinite(self.h))
            and np.all(np.isfinite(self.jh))
        )


def _linearize(problem: NlpProblem, z: np.ndarray) -> _Linearization:
    return _Linearization(
        f=float(problem.objective(z)),
        g=np.asarray(problem.objective_gradient(z), dtype=float),
        c=np.asarray(problem.equalities(z), dtype=float),
        jc=np.asarray(problem.equality_jacobian(z), dtype=float).reshape(-1, z.size),
        h=np.asarray(problem.inequalities(z), dtype=float),
        jh=np.asarray(problem.inequality_jacobian(z), dtype=float).reshape(-1, z.size),
    )


def _merit(problem: NlpProblem, z: np.ndarray, nu: float) -> Tuple[float, float]:
    """Return ``(merit, l1 violation)`` at ``z``."""
    f = float(problem.objective(z))
    c = np.asarray(problem.equalities(z), dtype=float)
    h = np.asarray(problem.inequalities(z), dtype=float)
    violation = float(np.sum(np.abs(c)) + np.sum(np.maximum(0.0, -h)))
    return f + nu * violation, violation


def convexify(hessian: np.ndarray) -> np.ndarray:
    """
    Add the smallest tried multiple of the identity that makes ``hessian``
    positive definite.
    """
    sym = 0.5 * (hessian + hessian.T)
    identity = np.eye(sym.shape[0])
    scale = max(1.0, float(np.max(np.abs(sym), initial=0.0)))
    shift = _SHIFT_FLOOR * scale
    while True:
        candidate = sym + shift * identity
        try:
            np.linalg.cholesky(candidate)
            return candidate
        except np.linalg.LinAlgError:
            shift = max(_SHIFT_START * scale, shift * _SHIFT_GROWTH)
            logger.debug(f"Hessian not positive definite, shifting by {shift:.3e}")


def _qp(
    hessian: np.ndarray,
    gradient: np.ndarray,
    c: np.ndarray,
    jc: np.ndarray,
    h: np.ndarray,
    jh: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve ``min 0.5 d'Hd + g'd  s.t.  c + Jc d = 0,  h + Jh d >= 0``.

    Returns:
        ``(d, equality multipliers, inequality multipliers)``

    Raises:
        ValueError: If quadprog reports inconsistent constraints.
    """
    n = gradient.size
    keep_eq = np.linalg.norm(jc, axis=1) > _ZERO_ROW if jc.size else np.zeros(0, dtype=bool)
    keep_in = np.linalg.norm(jh, axis=1) > _ZERO_ROW if jh.size else np.zeros(0, dtype=bool)
    a_eq = jc[keep_eq]
    a_in = jh[keep_in]
    constraints = np.vstack([a_eq, a_in]) if (a_eq.size or a_in.size) else np.zeros((0, n))
    rhs = np.concatenate([-c[keep_eq], -h[keep_in]])

    if constraints.shape[0] == 0:
        d = quadprog.solve_qp(hessian, -gradient)[0]
    else:
        d, _, _, _, multipliers, _ = quadprog.solve_qp(
            hessian, -gradient, constraints.T.copy(), rhs, int(a_eq.shape[0])
        )
    lam_eq = np.zeros(c.size)
    lam_in = np.zeros(h.size)
    if constraints.shape[0]:
        m_eq = int(a_eq.shape[0])
        lam_eq[keep_eq] = multipliers[:m_eq]
        lam_in[keep_in] = multipliers[m_eq:]
    return np.asarray(d, dtype=float), lam_eq, lam_in


def _elastic_qp(
    hessian: np.ndarray,
    gradient: np.ndarray,
    c: np.ndarray,
    jc: np.ndarray,
    h: np.ndarray,
    jh: np.ndarray,
    weight: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    l1-relaxed sub-problem, always feasible::

        min 0.5 d'Hd + g'd + weight * sum(r_plus + r_minus + t)
        s.t. c + Jc d = r_plus - r_minus,  h + Jh d + t >= 0,  r, t >= 0
    """
    n = gradient.size
    m_eq = c.size
    m_in = h.size
    size = n + 2 * m_eq + m_in
    big_h = np.eye(size) * _ELASTIC_REGULARIZATION
    big_h[:n, :n] = hessian
    big_g = np.concatenate([gradient, np.full(2 * m_eq + m_in, weight)])

    eq = np.zeros((m_eq, size))
    eq[:, :n] = jc
    eq[:, n:n + m_eq] = -np.eye(m_eq)
    eq[:, n + m_eq:n + 2 * m_eq] = np.eye(m_eq)

    ineq = np.zeros((m_in, size))
    ineq[:, :n] = jh
    ineq[:, n + 2 * m_eq:] = np.eye(m_in)

    bounds = np.zeros((2 * m_eq + m_in, size))
    bounds[:, n:] = np.eye(2 * m_eq + m_in)

    constraints = np.vstack([eq, ineq, bounds])
    rhs = np.concatenate([-c, -h, np.zeros(2 * m_eq + m_in)])
    solution, _, _, _, multipliers, _ = quadprog.solve_qp(
        big_h, -big_g, constraints.T.copy(), rhs, m_eq
    )
    return (
        np.asarray(solution[:n], dtype=float),
        np.asarray(multipliers[:m_eq], dtype=float),
        np.asarray(multipliers[m_eq:m_eq + m_in], dtype=float),
    )


def _linearized_violation(lin: _Linearization, d: np.ndarray) -> float:
    c = lin.c + lin.jc @ d
    h = lin.h + lin.jh @ d
    return float(np.sum(np.abs(c)) + np.sum(np.maximum(0.0, -h)))


def _bfgs_update(b: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Powell-damped BFGS update keeping ``b`` positive definite."""
    bs = b @ s
    sbs = float(s @ bs)
    if sbs <= 1e-16:
        return b
    sy = float(s @ y)
    theta = 1.0 if sy >= 0.2 * sbs else 0.8 * sbs / (sbs - sy)
    r = theta * y + (1.0 - theta) * bs
    sr = float(s @ r)
    if sr <= 1e-16:
        return b
    return b - np.outer(bs, bs) / sbs + np.outer(r, r) / sr


def _lagrangian_gradient(
    lin: _Linearization,
    lam_eq: np.ndarray,
    lam_in: np.ndarray
) -> np.ndarray:
    return lin.g - lin.jc.T @ lam_eq - lin.jh.T @ lam_in


def solve(
    problem: NlpProblem,
    guess: np.ndarray,
    config: Optional[Dict[str, Any]] = None
) -> Tuple[np.ndarray, SolveStats]:
    """
    Solve ``problem`` starting at ``guess``.

    Args:
        problem: Problem implementing ``NlpProblem``
        guess: Starting point
        config: Configuration (defaults to ``get_config()``)

    Returns:
        ``(solution, stats)``

    Raises:
        MaxIterations: If the iteration cap is reached
        SolverDiverged: If NaN or Inf values appear
        SolverFailure: If the line search cannot make progress
    """
    config = config or get_config()
    max_iterations = int(config.get("nlp_max_iterations", 200))
    tol = float(config.get("nlp_tolerance", 1e-6))
    ctol = float(config.get("nlp_constraint_tolerance", 1e-9))
    mode = str(config.get("nlp_hessian", "exact"))

    started = time.monotonic()
    stats = SolveStats(hessian=mode)
    z = np.array(guess, dtype=float, copy=True)
    n = z.size
    nu = 1.0
    bfgs = np.eye(n)
    lam_eq: Optional[np.ndarray] = None
    lam_in: Optional[np.ndarray] = None

    def finish(status: str, lin: _Linearization) -> None:
        stats.status = status
        stats.objective = lin.f
        stats.primal_residual = lin.primal_residual
        if lam_eq is not None:
            stats.stationarity = float(
                np.max(np.abs(_lagrangian_gradient(lin, lam_eq, lam_in)), initial=0.0)
            )
            stats.complementarity = float(np.max(np.abs(lam_in * lin.h), initial=0.0))
        stats.wall_time = time.monotonic() - started

    lin = _linearize(problem, z)
    for iteration in range(1, max_iterations + 1):
        stats.iterations = iteration
        if not lin.finite():
            finish("diverged", lin)
            raise SolverDiverged(
                f"Non-finite values at iteration {iteration}", last_iterate=z, stats=stats
            )

        if mode == "bfgs":
            hessian = bfgs
        else:
            multipliers_eq = lam_eq if lam_eq is not None else np.zeros(lin.c.size)
            multipliers_in = lam_in if lam_in is not None else np.zeros(lin.h.size)
            hessian = convexify(problem.lagrangian_hessian(z, multipliers_eq, multipliers_in))

        elastic = False
        try:
            d, new_eq, new_in = _qp(hessian, lin.g, lin.c, lin.jc, lin.h, lin.jh)
        except ValueError as e:
            weight = max(_ELASTIC_MIN_WEIGHT, 10.0 * nu)
            logger.debug(f"QP sub-problem failed ({e}); using elastic form, weight {weight:g}")
            d, new_eq, new_in = _elastic_qp(
                hessian, lin.g, lin.c, lin.jc, lin.h, lin.jh, weight
            )
            elastic = True
            stats.elastic_steps += 1
        new_in = np.maximum(new_in, 0.0)

        # First-order optimality at z with the fresh multipliers
        primal = lin.primal_residual
        grad_norm = float(np.max(np.abs(lin.g), initial=0.0))
        stationarity = float(
            np.max(np.abs(_lagrangian_gradient(lin, new_eq, new_in)), initial=0.0)
        )
        complementarity = float(np.max(np.abs(new_in * lin.h), initial=0.0))
        step_norm = float(np.max(np.abs(d), initial=0.0))
        logger.debug(
            f"SQP iter {iteration}: f={lin.f:.9g} primal={primal:.2e} "
            f"stat={stationarity:.2e} comp={complementarity:.2e} |d|={step_norm:.2e}"
        )
        tiny_step = step_norm <= 1e-12 * max(1.0, float(np.max(np.abs(z), initial=0.0)))
        kkt_tol = tol * (_STALL_KKT_FACTOR if tiny_step else 1.0)
        if (
            primal <= ctol
            and stationarity <= kkt_tol * max(1.0, grad_norm)
            and complementarity <= kkt_tol
        ):
            lam_eq, lam_in = new_eq, new_in
            finish("converged", lin)
            logger.debug(f"SQP converged in {iteration} iterations")
            return z, stats
        if tiny_step:
            lam_eq, lam_in = new_eq, new_in
            finish("stalled", lin)
            raise SolverFailure(
                f"Step vanished at iteration {iteration} away from a KKT point "
                f"(primal {primal:.3e}, stationarity {stationarity:.3e})",
                last_iterate=z,
                stats=stats,
            )

        # Exact penalty parameter
        multiplier_norm = float(
            np.max(np.abs(np.concatenate([new_eq, new_in])), initial=0.0)
        )
        if nu < 1.1 * multiplier_norm:
            nu = 1.1 * multiplier_norm + 1e-3
        theta = lin.violation
        theta_lin = _linearized_violation(lin, d)
        quadratic = float(lin.g @ d + 0.5 * d @ hessian @ d)
        if theta - theta_lin > 1e-14 and quadratic > 0.0:
            nu = max(nu, quadratic / (0.9 * (theta - theta_lin)))

        merit0 = lin.f + nu * theta
        slope = float(lin.g @ d) + nu * (theta_lin - theta)
        slope = min(slope, 0.0)

        step = 1.0
        accepted: Optional[np.ndarray] = None
        while step >= MIN_STEP_LENGTH:
            trial = z + step * d
            merit, _ = _merit(problem, trial, nu)
            if math.isfinite(merit) and merit <= merit0 + ARMIJO_FACTOR * step * slope:
                accepted = trial
                break
            if step == 1.0 and not elastic:
                corrected = _second_order_correction(problem, hessian, lin, z, d)
                if corrected is not None:
                    merit_soc, _ = _merit(problem, corrected, nu)
                    if math.isfinite(merit_soc) and merit_soc <= merit0 + ARMIJO_FACTOR * slope:
                        accepted = corrected
                        stats.second_order_corrections += 1
                        break
            step *= BACKTRACK_FACTOR

        if accepted is None:
            lam_eq, lam_in = new_eq, new_in
            finish("line_search_failed", lin)
            raise SolverFailure(
                f"Line search failed at iteration {iteration} "
                f"(primal residual {primal:.3e})",
                last_iterate=z,
                stats=stats,
            )

        new_lin = _linearize(problem, accepted)
        if mode == "bfgs" and new_lin.finite():
            s = accepted - z
            y = (
                _lagrangian_gradient(new_lin, new_eq, new_in)
                - _lagrangian_gradient(lin, new_eq, new_in)
            )
            bfgs = _bfgs_update(bfgs, s, y)

        z = accepted
        lin = new_lin
        lam_eq, lam_in = new_eq, new_in

    finish("max_iterations", lin)
    raise MaxIterations(
        f"No convergence after {max_iterations} iterations "
        f"(primal residual {lin.primal_residual:.3e})",
        last_iterate=z,
        stats=stats,
    )


def _second_order_correction(
    problem: NlpProblem,
    hessian: np.ndarray,
    lin: _Linearization,
    z: np.ndarray,
    d: np.ndarray
) -> Optional[np.ndarray]:
    """Step from ``z`` that also corrects the constraint curvature seen at ``z + d``."""
    trial = z + d
    try:
        c_trial = np.asarray(problem.equalities(trial), dtype=float)
        h_trial = np.asarray(problem.inequalities(trial), dtype=float)
        if not (np.all(np.isfinite(c_trial)) and np.all(np.isfinite(h_trial))):
            return None
        corrected, _, _ = _qp(
            hessian,
            lin.g,
            c_trial - lin.jc @ d,
            lin.jc,
            h_trial - lin.jh @ d,
            lin.jh,
        )
    except ValueError:
        return None
    return z + corrected
