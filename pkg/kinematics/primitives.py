"""
Primitives Module

Bang-coast-bang motion primitives of the double integrator.

A one-dimensional primitive accelerates with ``alpha_start * a_max`` for
``tau[0]`` seconds, coasts for ``tau[1]`` seconds and accelerates with
``alpha_end * a_max`` for ``tau[2]`` seconds. A two-dimensional primitive
pairs one primitive per axis with equal total durations.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from core.geometry import Vec2

logger = logging.getLogger(__name__)

Durations = Tuple[float, float, float]

# Velocities below this magnitude count as standing still (meters/second)
STATIONARY_VELOCITY: float = 1e-12


@dataclass_json
@dataclass(frozen=True)
class ExtremePoint:
    """
    Velocity zero-crossing of a primitive.

    Attributes:
        time: Time since the primitive start (seconds)
        position: Position at that time (meters)
        phase: 0 (first acceleration), 1 (coast) or 2 (final acceleration)
        stationary: True for a coast at zero velocity (the whole coast is extremal)
    """
    time: float
    position: float
    phase: int
    stationary: bool = False


@dataclass_json
@dataclass(frozen=True)
class Primitive1D:
    """
    Attributes:
        alpha_start: Acceleration multiplier of the first phase
        alpha_end: Acceleration multiplier of the last phase
        p_start: Initial position (meters)
        v_start: Initial velocity (meters/second)
        tau: Phase durations (seconds)
        a_max: Acceleration bound (meters/second^2)
    """
    alpha_start: float
    alpha_end: float
    p_start: float
    v_start: float
    tau: Durations
    a_max: float

    @property
    def duration(self) -> float:
        return float(sum(self.tau))

    def phase_boundaries(self) -> Tuple[float, float, float]:
        """End times of the three phases."""
        t0 = self.tau[0]
        t1 = t0 + self.tau[1]
        return (t0, t1, t1 + self.tau[2])

    def coast_state(self) -> Tuple[float, float]:
        """Position and velocity at the start of the coast."""
        acc = self.alpha_start * self.a_max
        t0 = self.tau[0]
        return (
            self.p_start + self.v_start * t0 + 0.5 * acc * t0 * t0,
            self.v_start + acc * t0,
        )

    def coast_end_state(self) -> Tuple[float, float]:
        """Position and velocity at the end of the coast."""
        p, v = self.coast_state()
        return (p + v * self.tau[1], v)

    def end_state(self) -> Tuple[float, float]:
        """Closed-form position and velocity after the full duration."""
        a = self.a_max
        t0, t1, t2 = self.tau
        v_end = self.v_start + a * (self.alpha_start * t0 + self.alpha_end * t2)
        p_end = (
            self.p_start
            + self.v_start * (t0 + t1 + t2)
            + 0.5 * a * self.alpha_start * t0 * t0
            + a * self.alpha_start * t0 * (t1 + t2)
            + 0.5 * a * self.alpha_end * t2 * t2
        )
        return (p_end, v_end)

    def evaluate(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Evaluate position, velocity and acceleration at local times ``t``.

        Times beyond the duration continue at the final velocity without
        acceleration.
        """
        t = np.asarray(t, dtype=float)
        b0, b1, b2 = self.phase_boundaries()
        acc_start = self.alpha_start * self.a_max
        acc_end = self.alpha_end * self.a_max
        p1, v1 = self.coast_state()
        p2, v2 = self.coast_end_state()
        p3, v3 = self.end_state()

        s0 = np.clip(t, 0.0, b0)
        s1 = t - b0
        s2 = t - b1
        s3 = t - b2

        in_phase0 = t < b0
        in_phase1 = (~in_phase0) & (t < b1)
        in_phase2 = (~in_phase0) & (~in_phase1) & (t <= b2)
        beyond = t > b2

        p = np.select(
            [in_phase0, in_phase1, in_phase2, beyond],
            [
                self.p_start + self.v_start * s0 + 0.5 * acc_start * s0 * s0,
                p1 + v1 * s1,
                p2 + v2 * s2 + 0.5 * acc_end * s2 * s2,
                p3 + v3 * s3,
            ],
            default=self.p_start,
        )
        v = np.select(
            [in_phase0, in_phase1, in_phase2, beyond],
            [self.v_start + acc_start * s0, np.full_like(t, v1),
             v2 + acc_end * s2, np.full_like(t, v3)],
            default=self.v_start,
        )
        a = np.select(
            [in_phase0, in_phase1, in_phase2 & (self.tau[2] > 0)],
            [np.full_like(t, acc_start), np.zeros_like(t), np.full_like(t, acc_end)],
            default=self._last_acceleration(),
        )
        return p, v, a

    def state_at(self, t: float) -> Tuple[float, float, float]:
        """Position, velocity and acceleration at local time ``t``."""
        p, v, a = self.evaluate(np.array([t]))
        return float(p[0]), float(v[0]), float(a[0])

    def split(self, t: float) -> Tuple["Primitive1D", "Primitive1D"]:
        """
        Split at local time ``t`` into two consecutive primitives.

        Both halves keep the acceleration multipliers; phases that fall
        entirely in the other half get zero duration.
        """
        b0, b1, b2 = self.phase_boundaries()
        t = min(max(t, 0.0), b2)
        t0, t1, t2 = self.tau
        if t <= b0:
            head = (t, 0.0, 0.0)
            tail = (t0 - t, t1, t2)
        elif t <= b1:
            head = (t0, t - b0, 0.0)
            tail = (0.0, b1 - t, t2)
        else:
            head = (t0, t1, t - b1)
            tail = (0.0, 0.0, b2 - t)
        p_mid, v_mid, _ = self.state_at(t)
        return (
            replace(self, tau=head),
            replace(self, p_start=p_mid, v_start=v_mid, tau=tail),
        )

    def _last_acceleration(self) -> float:
        if self.tau[2] > 0:
            return self.alpha_end * self.a_max
        if self.tau[1] > 0:
            return 0.0
        if self.tau[0] > 0:
            return self.alpha_start * self.a_max
        return 0.0


@dataclass_json
@dataclass(frozen=True)
class Primitive2D:
    """One primitive per axis sharing the total duration."""
    x: Primitive1D
    y: Primitive1D

    @property
    def duration(self) -> float:
        return max(self.x.duration, self.y.duration)

    def axis(self, index: int) -> Primitive1D:
        return self.x if index == 0 else self.y

    def state_at(self, t: float) -> Tuple[Vec2, Vec2, Vec2]:
        px, vx, ax = self.x.state_at(t)
        py, vy, ay = self.y.state_at(t)
        return (px, py), (vx, vy), (ax, ay)


def integrate_primitive(prim: Primitive2D) -> Tuple[Vec2, Vec2]:
    """
    Analytically integrate a two-dimensional primitive.

    Args:
        prim: Primitive to integrate

    Returns:
        ``(p_end, v_end)``
    """
    px, vx = prim.x.end_state()
    py, vy = prim.y.end_state()
    return (px, py), (vx, vy)


def extreme_points(prim: Primitive1D) -> List[ExtremePoint]:
    """
    Return the interior velocity zero-crossings of a primitive.

    Acceleration phases report the vertex of their parabola when it lies
    strictly inside the phase; a coast at zero velocity is reported once as
    a stationary point at its start.

    Args:
        prim: One-dimensional primitive

    Returns:
        Extreme points in time order
    """
    points: List[ExtremePoint] = []
    t0, t1, t2 = prim.tau

    acc = prim.alpha_start * prim.a_max
    if t0 > 0 and acc != 0.0:
        t_star = -prim.v_start / acc
        if 0.0 < t_star < t0:
            p, _, _ = prim.state_at(t_star)
            points.append(ExtremePoint(t_star, p, 0))

    p1, v1 = prim.coast_state()
    if t1 > 0 and abs(v1) <= STATIONARY_VELOCITY:
        points.append(ExtremePoint(t0, p1, 1, stationary=True))

    acc = prim.alpha_end * prim.a_max
    if t2 > 0 and acc != 0.0:
        t_star = -v1 / acc
        if 0.0 < t_star < t2:
            p2, v2 = prim.coast_end_state()
            position = p2 + v2 * t_star + 0.5 * acc * t_star * t_star
            points.append(ExtremePoint(t0 + t1 + t_star, position, 2))

    return points
