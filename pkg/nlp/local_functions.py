"""
Local Functions Module

Closed-form kinematic quantities of one axis of one primitive, with exact
gradients and Hessians with respect to the local argument

    u = [p, v, tau0, tau1, tau2, alpha_start, alpha_end].

The assembled problems map each slot of ``u`` either to a decision
variable or to a constant.
"""

from typing import Dict, Tuple

import numpy as np

P, V, T0, T1, T2, AS, AE = range(7)
LOCAL_SIZE = 7

# Acceleration multipliers closer to zero than this are clamped in the
# extreme-point expressions
ALPHA_GUARD: float = 1e-3

END_POSITION = "end_position"
END_VELOCITY = "end_velocity"
VELOCITY_AFTER_FIRST = "velocity_after_first"
COAST_START = "coast_start"
COAST_END = "coast_end"
VERTEX_FIRST = "vertex_first"
VERTEX_LAST = "vertex_last"

KINDS: Tuple[str, ...] = (
    END_POSITION,
    END_VELOCITY,
    VELOCITY_AFTER_FIRST,
    COAST_START,
    COAST_END,
    VERTEX_FIRST,
    VERTEX_LAST,
)

LocalValue = Tuple[float, np.ndarray, np.ndarray]


def _sym(h: np.ndarray, i: int, j: int, value: float) -> None:
    h[i, j] += value
    if i != j:
        h[j, i] += value


def _guard(alpha: float) -> Tuple[float, bool]:
    if abs(alpha) >= ALPHA_GUARD:
        return alpha, False
    return (ALPHA_GUARD if alpha >= 0.0 else -ALPHA_GUARD), True


def evaluate_local(u: np.ndarray, a_max: float) -> Dict[str, LocalValue]:
    """
    Evaluate every local function at ``u``.

    Args:
        u: Local argument of length 7
        a_max: Acceleration bound (meters/second^2)

    Returns:
        Mapping from function name to ``(value, gradient, hessian)``
    """
    p, v, t0, t1, t2, a_s, a_e = (float(x) for x in u)
    a = a_max
    out: Dict[str, LocalValue] = {}

    # Velocity after the first phase
    w = v + a * a_s * t0
    grad_w = np.zeros(LOCAL_SIZE)
    grad_w[V] = 1.0
    grad_w[T0] = a * a_s
    grad_w[AS] = a * t0
    hess_w = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(hess_w, T0, AS, a)
    out[VELOCITY_AFTER_FIRST] = (w, grad_w, hess_w)

    # End velocity
    g = np.zeros(LOCAL_SIZE)
    g[V] = 1.0
    g[T0] = a * a_s
    g[T2] = a * a_e
    g[AS] = a * t0
    g[AE] = a * t2
    h = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(h, T0, AS, a)
    _sym(h, T2, AE, a)
    out[END_VELOCITY] = (v + a * (a_s * t0 + a_e * t2), g, h)

    # Coast start position
    g = np.zeros(LOCAL_SIZE)
    g[P] = 1.0
    g[V] = t0
    g[T0] = v + a * a_s * t0
    g[AS] = 0.5 * a * t0 * t0
    h = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(h, V, T0, 1.0)
    _sym(h, T0, T0, a * a_s)
    _sym(h, T0, AS, a * t0)
    out[COAST_START] = (p + v * t0 + 0.5 * a * a_s * t0 * t0, g, h)

    # Coast end position
    coast_end = p + v * (t0 + t1) + 0.5 * a * a_s * t0 * t0 + a * a_s * t0 * t1
    g_c1 = np.zeros(LOCAL_SIZE)
    g_c1[P] = 1.0
    g_c1[V] = t0 + t1
    g_c1[T0] = v + a * a_s * (t0 + t1)
    g_c1[T1] = v + a * a_s * t0
    g_c1[AS] = 0.5 * a * t0 * t0 + a * t0 * t1
    h_c1 = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(h_c1, V, T0, 1.0)
    _sym(h_c1, V, T1, 1.0)
    _sym(h_c1, T0, T0, a * a_s)
    _sym(h_c1, T0, T1, a * a_s)
    _sym(h_c1, T0, AS, a * (t0 + t1))
    _sym(h_c1, T1, AS, a * t0)
    out[COAST_END] = (coast_end, g_c1, h_c1)

    # End position
    total = t0 + t1 + t2
    g = np.zeros(LOCAL_SIZE)
    g[P] = 1.0
    g[V] = total
    g[T0] = v + a * a_s * t0 + a * a_s * (t1 + t2)
    g[T1] = v + a * a_s * t0
    g[T2] = v + a * a_s * t0 + a * a_e * t2
    g[AS] = 0.5 * a * t0 * t0 + a * t0 * (t1 + t2)
    g[AE] = 0.5 * a * t2 * t2
    h = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(h, V, T0, 1.0)
    _sym(h, V, T1, 1.0)
    _sym(h, V, T2, 1.0)
    _sym(h, T0, T0, a * a_s)
    _sym(h, T0, T1, a * a_s)
    _sym(h, T0, T2, a * a_s)
    _sym(h, T0, AS, a * (t0 + t1 + t2))
    _sym(h, T1, AS, a * t0)
    _sym(h, T2, AS, a * t0)
    _sym(h, T2, T2, a * a_e)
    _sym(h, T2, AE, a * t2)
    value = (
        p + v * total + 0.5 * a * a_s * t0 * t0
        + a * a_s * t0 * (t1 + t2) + 0.5 * a * a_e * t2 * t2
    )
    out[END_POSITION] = (value, g, h)

    # Vertex of the first parabola: p - v^2 / (2 a alpha_start)
    alpha, clamped = _guard(a_s)
    g = np.zeros(LOCAL_SIZE)
    g[P] = 1.0
    g[V] = -v / (a * alpha)
    h = np.zeros((LOCAL_SIZE, LOCAL_SIZE))
    _sym(h, V, V, -1.0 / (a * alpha))
    if not clamped:
        g[AS] = v * v / (2.0 * a * alpha * alpha)
        _sym(h, V, AS, v / (a * alpha * alpha))
        _sym(h, AS, AS, -v * v / (a * alpha ** 3))
    out[VERTEX_FIRST] = (p - v * v / (2.0 * a * alpha), g, h)

    # Vertex of the last parabola: coast_end - w^2 / (2 a alpha_end)
    alpha, clamped = _guard(a_e)
    value = coast_end - w * w / (2.0 * a * alpha)
    g = g_c1 - (w / (a * alpha)) * grad_w
    h = (
        h_c1
        - np.outer(grad_w, grad_w) / (a * alpha)
        - (w / (a * alpha)) * hess_w
    )
    if not clamped:
        g[AE] += w * w / (2.0 * a * alpha * alpha)
        cross = (w / (a * alpha * alpha)) * grad_w
        h[AE, :] += cross
        h[:, AE] += cross
        h[AE, AE] += -w * w / (a * alpha ** 3)
    out[VERTEX_LAST] = (value, g, h)

    return out
