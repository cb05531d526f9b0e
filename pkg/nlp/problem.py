"""
Primitive Problem Module

Assembles the time-minimization problem over a chain of bang-coast-bang
primitives that follows a corridor sequence.

Decision vector layout (``n`` primitives, ``m`` movable waypoints)::

    [vx_k, vy_k, tx0_k, tx1_k, tx2_k, ty0_k, ty1_k, ty2_k]  for k = 0 .. n-1
    alpha_start_free, alpha_end_free, slack_start, slack_end
    [dx_j, dy_j]                                            per movable waypoint

Every constraint row is a linear combination of local kinematic functions
(see ``nlp.local_functions``), linear terms, squared terms and a constant.
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from config.config_manager import get_config
from core.constants import CONTINUITY_TOLERANCE, INITIAL_TAU_RATIOS, SLACK_WEIGHT
from core.exceptions import SelectionMismatch
from core.geometry import GEOMETRY_TOLERANCE, Box
from corridors.models import CorridorSequence
from heuristics.selection import PrimitiveSelection
from kinematics.primitives import Primitive1D, Primitive2D, extreme_points
from kinematics.trajectory import Trajectory, TrajectoryPiece
from nlp.local_functions import (
    AE,
    AS,
    COAST_END,
    COAST_START,
    END_POSITION,
    END_VELOCITY,
    LOCAL_SIZE,
    P,
    T0,
    T1,
    T2,
    V,
    VELOCITY_AFTER_FIRST,
    VERTEX_FIRST,
    VERTEX_LAST,
    LocalValue,
    evaluate_local,
)
from world.models import Scenario

logger = logging.getLogger(__name__)

# Fraction of the velocity bound the initial guess travels at
_GUESS_SPEED_FRACTION: float = 0.5


@dataclass(frozen=True)
class Term:
    """``coefficient * local_function(kind)`` of one primitive axis."""
    kind: str
    primitive: int
    axis: int
    coefficient: float = 1.0


@dataclass(frozen=True)
class ConstraintRow:
    """
    One scalar constraint.

    value = sum(terms) + sum(c * z[i]) + sum(c * z[i]**2) + constant
    """
    name: str
    terms: Tuple[Term, ...] = ()
    linear: Tuple[Tuple[int, float], ...] = ()
    quadratic: Tuple[Tuple[int, float], ...] = ()
    constant: float = 0.0


@dataclass_json
@dataclass(frozen=True)
class ExtremumConstraint:
    """
    Corridor bound on an acceleration-phase extremum.

    Attributes:
        primitive: Primitive index k
        axis: 0 for x, 1 for y
        phase: 0 for the first acceleration phase, 2 for the last
    """
    primitive: int
    axis: int
    phase: int


@dataclass(frozen=True)
class VariableLayout:
    """Index arithmetic of the decision vector."""
    n_primitives: int
    movable: Tuple[int, ...] = ()

    @classmethod
    def from_selection(cls, selection: PrimitiveSelection) -> "VariableLayout":
        return cls(selection.n_primitives, tuple(selection.movable_indices()))

    @property
    def size(self) -> int:
        return 8 * self.n_primitives + 4 + 2 * len(self.movable)

    def velocity(self, k: int, axis: int) -> int:
        return 8 * k + axis

    def tau(self, k: int, axis: int, phase: int) -> int:
        return 8 * k + 2 + 3 * axis + phase

    @property
    def alpha_start_free(self) -> int:
        return 8 * self.n_primitives

    @property
    def alpha_end_free(self) -> int:
        return 8 * self.n_primitives + 1

    @property
    def slack_start(self) -> int:
        return 8 * self.n_primitives + 2

    @property
    def slack_end(self) -> int:
        return 8 * self.n_primitives + 3

    def delta(self, waypoint: int, axis: int) -> Optional[int]:
        if waypoint not in self.movable:
            return None
        return 8 * self.n_primitives + 4 + 2 * self.movable.index(waypoint) + axis

    def names(self) -> List[str]:
        names = [""] * self.size
        for k in range(self.n_primitives):
            for axis, label in enumerate("xy"):
                names[self.velocity(k, axis)] = f"v{label}[{k}]"
                for phase in range(3):
                    names[self.tau(k, axis, phase)] = f"tau{label}{phase}[{k}]"
        names[self.alpha_start_free] = "alpha_start_free"
        names[self.alpha_end_free] = "alpha_end_free"
        names[self.slack_start] = "slack_start"
        names[self.slack_end] = "slack_end"
        for waypoint in self.movable:
            for axis, label in enumerate("xy"):
                names[self.delta(waypoint, axis)] = f"d{label}[{waypoint}]"
        return names


class PrimitiveProblem:
    """
    Time-minimization over a primitive chain through a corridor sequence.

    Equalities (``2 + 5n``): initial velocity, equal axis durations per
    primitive, position and velocity chaining with the final velocity at
    zero. Inequalities (``g >= 0``): nonnegative durations, velocity bounds
    at the primitive start and after the first phase, both coast endpoints
    inside the owning inflated corridor, slacked bounds on the free
    accelerations, offset boxes of movable waypoints and any extremum
    constraints added by repair.
    """

    def __init__(
        self,
        selection: PrimitiveSelection,
        sequence: CorridorSequence,
        scenario: Scenario,
        config: Optional[Dict[str, Any]] = None,
        extremum_constraints: Sequence[ExtremumConstraint] = ()
    ):
        config = config or get_config()
        self.selection = selection
        self.sequence = sequence
        self.scenario = scenario
        self.config = config
        self.slack_weight = float(config.get("slack_weight", SLACK_WEIGHT))
        self.extremum_constraints: Tuple[ExtremumConstraint, ...] = tuple(extremum_constraints)
        self.layout = VariableLayout.from_selection(selection)
        self.inflated: List[Box] = sequence.inflated_boxes(scenario.vehicle)

        self._check_selection()
        self._slot_index, self._slot_base = self._build_slots()
        self.equality_rows: List[ConstraintRow] = self._build_equalities()
        self.inequality_rows: List[ConstraintRow] = self._build_inequalities()
        self._cache_key: Optional[bytes] = None
        self._cache_value: List[List[Dict[str, LocalValue]]] = []

    @property
    def n_variables(self) -> int:
        return self.layout.size

    @property
    def n_primitives(self) -> int:
        return self.layout.n_primitives

    # Construction

    def _check_selection(self) -> None:
        n = self.n_primitives
        if n != len(self.sequence):
            raise SelectionMismatch(
                f"Selection has {n} primitives for {len(self.sequence)} corridors"
            )
        for k, point in enumerate(self.selection.waypoints):
            owners = [j for j in (k - 1, k) if 0 <= j < n]
            for j in owners:
                if not self.inflated[j].contains(point, GEOMETRY_TOLERANCE):
                    raise SelectionMismatch(
                        f"Waypoint {k} at {point} lies outside the admissible "
                        f"box of corridor {j}"
                    )

    def _build_slots(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per primitive axis, the variable index (or -1) and constant of each local slot."""
        n = self.n_primitives
        layout = self.layout
        sel = self.selection
        index = np.full((n, 2, LOCAL_SIZE), -1, dtype=int)
        base = np.zeros((n, 2, LOCAL_SIZE))
        for k in range(n):
            for axis in (0, 1):
                base[k, axis, P] = sel.waypoints[k][axis]
                delta = layout.delta(k, axis)
                if delta is not None:
                    index[k, axis, P] = delta
                index[k, axis, V] = layout.velocity(k, axis)
                for phase, slot in enumerate((T0, T1, T2)):
                    index[k, axis, slot] = layout.tau(k, axis, phase)
                base[k, axis, AS] = sel.signs[k][axis]
                base[k, axis, AE] = sel.signs[k + 1][axis]
                if k == 0 and axis == sel.free_start_axis:
                    index[k, axis, AS] = layout.alpha_start_free
                    base[k, axis, AS] = 0.0
                if k == n - 1 and axis == sel.free_end_axis:
                    index[k, axis, AE] = layout.alpha_end_free
                    base[k, axis, AE] = 0.0
        return index, base

    def _build_equalities(self) -> List[ConstraintRow]:
        n = self.n_primitives
        layout = self.layout
        v0 = self.scenario.v0
        rows = []
        for axis, label in enumerate("xy"):
            rows.append(ConstraintRow(
                name=f"initial_velocity_{label}",
                linear=((layout.velocity(0, axis), 1.0),),
                constant=-v0[axis],
            ))
        for k in range(n):
            linear = tuple(
                (layout.tau(k, 0, phase), 1.0) for phase in range(3)
            ) + tuple(
                (layout.tau(k, 1, phase), -1.0) for phase in range(3)
            )
            rows.append(ConstraintRow(name=f"equal_durations[{k}]", linear=linear))
        for k in range(n):
            for axis, label in enumerate("xy"):
                target = self.selection.waypoints[k + 1][axis]
                delta = layout.delta(k + 1, axis) if k + 1 < n else None
                rows.append(ConstraintRow(
                    name=f"position_chain_{label}[{k}]",
                    terms=(Term(END_POSITION, k, axis),),
                    linear=((delta, -1.0),) if delta is not None else (),
                    constant=-target,
                ))
                rows.append(ConstraintRow(
                    name=f"velocity_chain_{label}[{k}]",
                    terms=(Term(END_VELOCITY, k, axis),),
                    linear=((layout.velocity(k + 1, axis), -1.0),) if k + 1 < n else (),
                ))
        return rows

    def _build_inequalities(self) -> List[ConstraintRow]:
        n = self.n_primitives
        layout = self.layout
        v_max = self.scenario.vehicle.v_max
        rows: List[ConstraintRow] = []

        for k in range(n):
            for axis, label in enumerate("xy"):
                for phase in range(3):
                    rows.append(ConstraintRow(
                        name=f"tau{label}{phase}[{k}]>=0",
                        linear=((layout.tau(k, axis, phase), 1.0),),
                    ))

        for k in range(n):
            for axis, label in enumerate("xy"):
                index = layout.velocity(k, axis)
                rows.append(ConstraintRow(
                    name=f"v{label}[{k}]<=vmax", linear=((index, -1.0),), constant=v_max
                ))
                rows.append(ConstraintRow(
                    name=f"v{label}[{k}]>=-vmax", linear=((index, 1.0),), constant=v_max
                ))
                rows.append(ConstraintRow(
                    name=f"v{label}'[{k}]<=vmax",
                    terms=(Term(VELOCITY_AFTER_FIRST, k, axis, -1.0),),
                    constant=v_max,
                ))
                rows.append(ConstraintRow(
                    name=f"v{label}'[{k}]>=-vmax",
                    terms=(Term(VELOCITY_AFTER_FIRST, k, axis, 1.0),),
                    constant=v_max,
                ))

        for k in range(n):
            for kind in (COAST_START, COAST_END):
                for axis in (0, 1):
                    rows.extend(self._corridor_rows(kind, k, axis))

        for index, label in (
            (layout.slack_start, "start"), (layout.slack_end, "end")
        ):
            alpha = layout.alpha_start_free if label == "start" else layout.alpha_end_free
            for sign, bound in ((-1.0, "upper"), (1.0, "lower")):
                rows.append(ConstraintRow(
                    name=f"alpha_{label}_free_{bound}",
                    linear=((alpha, sign),),
                    quadratic=((index, 1.0),),
                    constant=1.0,
                ))

        for waypoint in layout.movable:
            bounds = self.selection.delta_bounds[waypoint]
            for axis, label in enumerate("xy"):
                low, high = bounds.bounds(axis)
                index = layout.delta(waypoint, axis)
                rows.append(ConstraintRow(
                    name=f"d{label}[{waypoint}]>=low", linear=((index, 1.0),), constant=-low
                ))
                rows.append(ConstraintRow(
                    name=f"d{label}[{waypoint}]<=high", linear=((index, -1.0),), constant=high
                ))

        for constraint in self.extremum_constraints:
            kind = VERTEX_FIRST if constraint.phase == 0 else VERTEX_LAST
            rows.extend(self._corridor_rows(kind, constraint.primitive, constraint.axis))

        return rows

    def _corridor_rows(self, kind: str, k: int, axis: int) -> List[ConstraintRow]:
        low, high = self.inflated[k].bounds(axis)
        label = "xy"[axis]
        return [
            ConstraintRow(
                name=f"{kind}_{label}[{k}]>=low",
                terms=(Term(kind, k, axis, 1.0),),
                constant=-low,
            ),
            ConstraintRow(
                name=f"{kind}_{label}[{k}]<=high",
                terms=(Term(kind, k, axis, -1.0),),
                constant=high,
            ),
        ]

    # Evaluation

    def local_arguments(self, z: np.ndarray, k: int, axis: int) -> np.ndarray:
        index = self._slot_index[k, axis]
        u = self._slot_base[k, axis].copy()
        mask = index >= 0
        u[mask] += z[index[mask]]
        return u

    def _locals(self, z: np.ndarray) -> List[List[Dict[str, LocalValue]]]:
        key = np.asarray(z, dtype=float).tobytes()
        if key != self._cache_key:
            a_max = self.scenario.vehicle.a_max
            self._cache_value = [
                [evaluate_local(self.local_arguments(z, k, axis), a_max) for axis in (0, 1)]
                for k in range(self.n_primitives)
            ]
            self._cache_key = key
        return self._cache_value

    def _row_value(self, row: ConstraintRow, z: np.ndarray, local) -> float:
        value = row.constant
        for term in row.terms:
            value += term.coefficient * local[term.primitive][term.axis][term.kind][0]
        for index, coefficient in row.linear:
            value += coefficient * z[index]
        for index, coefficient in row.quadratic:
            value += coefficient * z[index] ** 2
        return float(value)

    def _row_gradient(self, row: ConstraintRow, z: np.ndarray, local) -> np.ndarray:
        grad = np.zeros(self.n_variables)
        for term in row.terms:
            index = self._slot_index[term.primitive, term.axis]
            mask = index >= 0
            local_grad = local[term.primitive][term.axis][term.kind][1]
            np.add.at(grad, index[mask], term.coefficient * local_grad[mask])
        for index, coefficient in row.linear:
            grad[index] += coefficient
        for index, coefficient in row.quadratic:
            grad[index] += 2.0 * coefficient * z[index]
        return grad

    def _add_row_hessian(
        self,
        hessian: np.ndarray,
        row: ConstraintRow,
        weight: float,
        local
    ) -> None:
        if weight == 0.0:
            return
        for term in row.terms:
            index = self._slot_index[term.primitive, term.axis]
            mask = index >= 0
            variables = index[mask]
            local_hess = local[term.primitive][term.axis][term.kind][2]
            hessian[np.ix_(variables, variables)] += (
                weight * term.coefficient * local_hess[np.ix_(mask, mask)]
            )
        for index, coefficient in row.quadratic:
            hessian[index, index] += weight * 2.0 * coefficient

    def _values(self, rows: List[ConstraintRow], z: np.ndarray) -> np.ndarray:
        local = self._locals(z)
        return np.array([self._row_value(row, z, local) for row in rows], dtype=float)

    def _jacobian(self, rows: List[ConstraintRow], z: np.ndarray) -> np.ndarray:
        local = self._locals(z)
        if not rows:
            return np.zeros((0, self.n_variables))
        return np.vstack([self._row_gradient(row, z, local) for row in rows])

    def objective(self, z: np.ndarray) -> float:
        layout = self.layout
        total = sum(
            z[layout.tau(k, 0, phase)]
            for k in range(self.n_primitives)
            for phase in range(3)
        )
        slack = z[layout.slack_start] ** 2 + z[layout.slack_end] ** 2
        return float(total + self.slack_weight * slack)

    def objective_gradient(self, z: np.ndarray) -> np.ndarray:
        layout = self.layout
        grad = np.zeros(self.n_variables)
        for k in range(self.n_primitives):
            for phase in range(3):
                grad[layout.tau(k, 0, phase)] = 1.0
        grad[layout.slack_start] = 2.0 * self.slack_weight * z[layout.slack_start]
        grad[layout.slack_end] = 2.0 * self.slack_weight * z[layout.slack_end]
        return grad

    def equalities(self, z: np.ndarray) -> np.ndarray:
        return self._values(self.equality_rows, z)

    def equality_jacobian(self, z: np.ndarray) -> np.ndarray:
        return self._jacobian(self.equality_rows, z)

    def inequalities(self, z: np.ndarray) -> np.ndarray:
        return self._values(self.inequality_rows, z)

    def inequality_jacobian(self, z: np.ndarray) -> np.ndarray:
        return self._jacobian(self.inequality_rows, z)

    def lagrangian_hessian(
        self,
        z: np.ndarray,
        lam_eq: np.ndarray,
        lam_in: np.ndarray
    ) -> np.ndarray:
        """Hessian of ``f - lam_eq . c - lam_in . g``."""
        layout = self.layout
        local = self._locals(z)
        hessian = np.zeros((self.n_variables, self.n_variables))
        hessian[layout.slack_start, layout.slack_start] = 2.0 * self.slack_weight
        hessian[layout.slack_end, layout.slack_end] = 2.0 * self.slack_weight
        for row, weight in zip(self.equality_rows, lam_eq):
            self._add_row_hessian(hessian, row, -float(weight), local)
        for row, weight in zip(self.inequality_rows, lam_in):
            self._add_row_hessian(hessian, row, -float(weight), local)
        return hessian

    # Interpretation

    def primitives(self, z: np.ndarray) -> List[Primitive2D]:
        """Primitives encoded by ``z`` (durations clipped at zero)."""
        a_max = self.scenario.vehicle.a_max
        result = []
        for k in range(self.n_primitives):
            axes = []
            for axis in (0, 1):
                u = self.local_arguments(z, k, axis)
                axes.append(Primitive1D(
                    alpha_start=float(u[AS]),
                    alpha_end=float(u[AE]),
                    p_start=float(u[P]),
                    v_start=float(u[V]),
                    tau=(max(0.0, float(u[T0])), max(0.0, float(u[T1])), max(0.0, float(u[T2]))),
                    a_max=a_max,
                ))
            result.append(Primitive2D(axes[0], axes[1]))
        return result

    def trajectory(self, z: np.ndarray) -> Trajectory:
        pieces = []
        start = 0.0
        for prim in self.primitives(z):
            pieces.append(TrajectoryPiece(start, prim))
            start += prim.duration
        trajectory = Trajectory(pieces)
        jump_p, jump_v = trajectory.continuity_errors()
        if max(jump_p, jump_v) > CONTINUITY_TOLERANCE:
            logger.warning(
                f"Primitive chaining is off by {jump_p:.3e} m, {jump_v:.3e} m/s"
            )
        return trajectory

    def t_move(self, z: np.ndarray) -> float:
        return float(sum(prim.duration for prim in self.primitives(z)))

    def max_slack(self, z: np.ndarray) -> float:
        layout = self.layout
        return float(max(abs(z[layout.slack_start]), abs(z[layout.slack_end])))

    def coasting_waypoints(self, z: np.ndarray, eps: float) -> List[int]:
        """
        Interior waypoints the vehicle passes on a straight coast: the
        final phase before and the first phase after are both shorter than
        ``eps`` in both axes.
        """
        layout = self.layout
        found = []
        for k in range(1, self.n_primitives):
            if all(
                z[layout.tau(k - 1, axis, 2)] < eps and z[layout.tau(k, axis, 0)] < eps
                for axis in (0, 1)
            ):
                found.append(k)
        return found

    def extremum_violations(
        self,
        z: np.ndarray,
        tol: float = GEOMETRY_TOLERANCE
    ) -> List[ExtremumConstraint]:
        """Acceleration-phase extrema lying outside their owning inflated corridor."""
        violations = []
        for k, prim in enumerate(self.primitives(z)):
            for axis in (0, 1):
                low, high = self.inflated[k].bounds(axis)
                for point in extreme_points(prim.axis(axis)):
                    if point.stationary:
                        continue
                    if point.position < low - tol or point.position > high + tol:
                        violations.append(ExtremumConstraint(k, axis, point.phase))
        return violations

    def describe(self, z: Optional[np.ndarray] = None) -> str:
        """
        JSON dump of the variables, their bounds and the constraint rows.

        With ``z`` given, also reports the Jacobian sparsity at that point.
        """
        lower: List[Optional[float]] = [None] * self.n_variables
        for k in range(self.n_primitives):
            for axis in (0, 1):
                for phase in range(3):
                    lower[self.layout.tau(k, axis, phase)] = 0.0
        dump: Dict[str, Any] = {
            "variables": [
                {"name": name, "lower": low}
                for name, low in zip(self.layout.names(), lower)
            ],
            "equalities": [row.name for row in self.equality_rows],
            "inequalities": [row.name for row in self.inequality_rows],
            "extremum_constraints": [c.to_dict() for c in self.extremum_constraints],
        }
        if z is not None:
            dump["sparsity"] = {
                "equalities": [
                    np.flatnonzero(row).tolist() for row in self.equality_jacobian(z)
                ],
                "inequalities": [
                    np.flatnonzero(row).tolist() for row in self.inequality_jacobian(z)
                ],
            }
        return json.dumps(dump, indent=2)


def assemble(
    selection: PrimitiveSelection,
    sequence: CorridorSequence,
    scenario: Scenario,
    config: Optional[Dict[str, Any]] = None,
    extremum_constraints: Sequence[ExtremumConstraint] = ()
) -> PrimitiveProblem:
    """
    Build the primitive problem for a selection.

    Raises:
        SelectionMismatch: If a waypoint is outside its corridor's admissible box.
    """
    problem = PrimitiveProblem(selection, sequence, scenario, config, extremum_constraints)
    logger.debug(
        f"Assembled problem: {problem.n_variables} variables, "
        f"{len(problem.equality_rows)} equalities, "
        f"{len(problem.inequality_rows)} inequalities"
    )
    return problem


def initial_guess(
    selection: PrimitiveSelection,
    scenario: Scenario,
    config: Optional[Dict[str, Any]] = None
) -> np.ndarray:
    """
    Starting point for the primitive problem.

    Each primitive gets durations ``(1, 7, 0.2) * tau'`` in both axes, with
    ``tau'`` sized for half the velocity bound and at least
    ``initial_tau_min``. The initial velocity of each primitive makes its
    endpoint land exactly on the next waypoint.
    """
    config = config or get_config()
    tau_min = float(config.get("initial_tau_min", 0.06))
    vehicle = scenario.vehicle
    layout = VariableLayout.from_selection(selection)
    ratios = INITIAL_TAU_RATIOS
    total_ratio = float(sum(ratios))
    a = vehicle.a_max

    z = np.zeros(layout.size)
    for k in range(selection.n_primitives):
        start = selection.waypoints[k]
        end = selection.waypoints[k + 1]
        distance = max(abs(end[0] - start[0]), abs(end[1] - start[1]))
        tau_prime = max(
            tau_min, distance / (_GUESS_SPEED_FRACTION * vehicle.v_max * total_ratio)
        )
        t0, t1, t2 = (r * tau_prime for r in ratios)
        duration = t0 + t1 + t2
        for axis in (0, 1):
            a_s = selection.signs[k][axis]
            a_e = selection.signs[k + 1][axis]
            drift = a * (0.5 * a_s * t0 * t0 + a_s * t0 * (t1 + t2) + 0.5 * a_e * t2 * t2)
            z[layout.velocity(k, axis)] = (end[axis] - start[axis] - drift) / duration
            for phase, value in enumerate((t0, t1, t2)):
                z[layout.tau(k, axis, phase)] = value

    z[layout.alpha_start_free] = selection.signs[0][selection.free_start_axis]
    z[layout.alpha_end_free] = selection.signs[-1][selection.free_end_axis]
    return z


def add_extremum_constraints(
    problem: PrimitiveProblem,
    solution: np.ndarray
) -> PrimitiveProblem:
    """
    Constrain every extremum of ``solution`` that leaves its corridor.

    Returns ``problem`` itself when nothing new is violated, otherwise a
    new problem with two extra rows per violating extremum.
    """
    added = [
        constraint
        for constraint in dict.fromkeys(problem.extremum_violations(solution))
        if constraint not in problem.extremum_constraints
    ]
    if not added:
        return problem
    logger.info(f"Adding {len(added)} extremum constraint(s): {added}")
    return PrimitiveProblem(
        problem.selection,
        problem.sequence,
        problem.scenario,
        problem.config,
        problem.extremum_constraints + tuple(added),
    )
