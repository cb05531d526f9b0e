"""
Exceptions Module

This module defines the exception hierarchy raised by the planning library.
Every error derives from PlannerError so callers can catch one type.
"""

from typing import Any, Optional


class PlannerError(Exception):
    """Base class for all planning errors."""


class ParseError(PlannerError):
    """
    Raised when a map or scenario file cannot be parsed.

    Attributes:
        line: 1-based line number of the offending input (0 when unknown)
        reason: Human readable description of the problem
    """

    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(PlannerError):
    """Raised when a parsed object violates one of its invariants."""


class OutOfBounds(PlannerError):
    """Raised when a vehicle footprint leaves the grid extent."""


class NoPath(PlannerError):
    """Raised when the goal cell cannot be reached from the start cell."""


class DegenerateSequence(PlannerError):
    """Raised when a corridor sequence violates its invariants."""


class EmptyCandidates(PlannerError):
    """Raised when the candidate waypoint filter removes every candidate."""


class SelectionMismatch(PlannerError):
    """Raised when a primitive selection does not fit its corridor sequence."""


class GenerationStuck(PlannerError):
    """Raised when random scenario generation exceeds its rejection budget."""


class SolverFailure(PlannerError):
    """
    Raised when the optimizer fails to return an acceptable point.

    Attributes:
        last_iterate: Last primal iterate reached by the solver, if any
        stats: Solve statistics gathered up to the failure, if any
        problem: Problem the last iterate belongs to, once known
    """

    def __init__(
        self,
        message: str,
        last_iterate: Optional[Any] = None,
        stats: Optional[Any] = None,
        problem: Optional[Any] = None
    ) -> None:
        super().__init__(message)
        self.last_iterate = last_iterate
        self.stats = stats
        self.problem = problem


class MaxIterations(SolverFailure):
    """Raised when the solver hits its iteration cap."""


class SolverDiverged(SolverFailure):
    """Raised when NaN or Inf values appear in the iterates."""
