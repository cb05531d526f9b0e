"""
Trajectory Module

Piecewise bang-coast-bang trajectories: evaluation, uniform sampling and
export to CSV samples and JSON pieces.
"""

import bisect
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from dataclasses_json import dataclass_json

from core.exceptions import ParseError
from core.geometry import Vec2
from kinematics.primitives import ExtremePoint, Primitive2D, extreme_points

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "px", "py", "vx", "vy", "ax", "ay")


@dataclass_json
@dataclass(frozen=True)
class TrajectoryPiece:
    """A primitive placed at an absolute start time (seconds)."""
    start_time: float
    primitive: Primitive2D

    @property
    def end_time(self) -> float:
        return self.start_time + self.primitive.duration


@dataclass
class TrajectorySamples:
    """
    Uniform samples of a trajectory.

    Attributes:
        t: Sample times, shape (N,)
        p: Positions, shape (N, 2)
        v: Velocities, shape (N, 2)
        a: Accelerations, shape (N, 2)
    """
    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    a: np.ndarray

    def __len__(self) -> int:
        return int(self.t.shape[0])

    def rows(self) -> List[Tuple[float, ...]]:
        return [
            (
                float(self.t[i]),
                float(self.p[i, 0]), float(self.p[i, 1]),
                float(self.v[i, 0]), float(self.v[i, 1]),
                float(self.a[i, 0]), float(self.a[i, 1]),
            )
            for i in range(len(self))
        ]


@dataclass
class Trajectory:
    """Ordered pieces covering ``[0, t_move]``."""
    pieces: List[TrajectoryPiece] = field(default_factory=list)

    @property
    def t_move(self) -> float:
        if not self.pieces:
            return 0.0
        return self.pieces[-1].end_time

    def piece_index(self, t: float) -> int:
        """Index of the piece active at time ``t`` (clamped to the ends)."""
        starts = [piece.start_time for piece in self.pieces]
        return max(0, min(len(self.pieces) - 1, bisect.bisect_right(starts, t) - 1))

    def state_at(self, t: float) -> Tuple[Vec2, Vec2, Vec2]:
        """Position, velocity and acceleration at absolute time ``t``."""
        piece = self.pieces[self.piece_index(t)]
        return piece.primitive.state_at(t - piece.start_time)

    def sample_times(self, rate: float) -> np.ndarray:
        """
        Times ``k / rate`` for ``k / rate <= t_move`` plus ``t_move`` itself.

        Raises:
            ValueError: If ``rate`` is not positive.
        """
        if not rate > 0:
            raise ValueError(f"Sampling rate must be positive, got {rate}")
        t_move = self.t_move
        count = int(math.floor(t_move * rate + 1e-9)) + 1
        times = np.arange(count, dtype=float) / rate
        if t_move - times[-1] > 1e-12:
            times = np.append(times, t_move)
        return times

    def evaluate(self, times: np.ndarray) -> TrajectorySamples:
        """Evaluate the trajectory at arbitrary absolute times."""
        times = np.asarray(times, dtype=float)
        p = np.zeros((times.size, 2))
        v = np.zeros((times.size, 2))
        a = np.zeros((times.size, 2))
        if not self.pieces:
            return TrajectorySamples(times, p, v, a)

        starts = np.array([piece.start_time for piece in self.pieces])
        owner = np.clip(
            np.searchsorted(starts, times, side="right") - 1, 0, len(self.pieces) - 1
        )
        for index, piece in enumerate(self.pieces):
            mask = owner == index
            if not mask.any():
                continue
            local = times[mask] - piece.start_time
            for axis in (0, 1):
                pa, va, aa = piece.primitive.axis(axis).evaluate(local)
                p[mask, axis] = pa
                v[mask, axis] = va
                a[mask, axis] = aa
        return TrajectorySamples(times, p, v, a)

    def sample(self, rate: float) -> TrajectorySamples:
        return self.evaluate(self.sample_times(rate))

    def extreme_points(self) -> List[Tuple[int, int, ExtremePoint]]:
        """All extreme points as ``(piece index, axis, point)``."""
        found = []
        for index, piece in enumerate(self.pieces):
            for axis in (0, 1):
                for point in extreme_points(piece.primitive.axis(axis)):
                    found.append((index, axis, point))
        return found

    def continuity_errors(self) -> Tuple[float, float]:
        """Largest position and velocity jumps between consecutive pieces."""
        worst_p = 0.0
        worst_v = 0.0
        for before, after in zip(self.pieces, self.pieces[1:]):
            for axis in (0, 1):
                p_end, v_end = before.primitive.axis(axis).end_state()
                nxt = after.primitive.axis(axis)
                worst_p = max(worst_p, abs(p_end - nxt.p_start))
                worst_v = max(worst_v, abs(v_end - nxt.v_start))
        return worst_p, worst_v

    def final_state(self) -> Tuple[Vec2, Vec2]:
        p, v, _ = self.state_at(self.t_move)
        return p, v

    def to_pieces_export(self) -> str:
        """JSON array of the analytic pieces with absolute start times."""
        return json.dumps([piece.to_dict() for piece in self.pieces], indent=2)

    def write_csv(self, path: str, rate: float) -> int:
        """
        Write uniform samples as CSV with a header row.

        Returns:
            Number of sample rows written
        """
        samples = self.sample(rate)
        write_samples_csv(path, samples)
        logger.debug(f"Wrote {len(samples)} samples to {path}")
        return len(samples)


def sample(trajectory: Trajectory, rate_hz: float) -> TrajectorySamples:
    """Sample ``trajectory`` uniformly at ``rate_hz``, ending exactly at t_move."""
    return trajectory.sample(rate_hz)


def write_samples_csv(path: str, samples: TrajectorySamples) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for row in samples.rows():
            writer.writerow([repr(value) for value in row])


def read_samples_csv(path: str) -> TrajectorySamples:
    """
    Read samples written by ``write_samples_csv``.

    Raises:
        ParseError: With the 1-based line of a malformed row.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(h.strip() for h in rows[0]) != CSV_HEADER:
        raise ParseError(1, f"expected header {','.join(CSV_HEADER)}")
    values = []
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ParseError(line_number, f"expected {len(CSV_HEADER)} columns, got {len(row)}")
        try:
            values.append([float(value) for value in row])
        except ValueError as e:
            raise ParseError(line_number, str(e)) from e
    if not values:
        raise ParseError(2, "no samples")
    data = np.array(values)
    return TrajectorySamples(data[:, 0], data[:, 1:3], data[:, 3:5], data[:, 5:7])
