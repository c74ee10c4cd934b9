"""
Exception hierarchy for the AutoProp design toolkit.
"""

from typing import Optional


class AutoPropError(Exception):
    """Base class for all toolkit errors."""


class DomainError(AutoPropError, ValueError):
    """An input lies outside the domain of an operation."""


class DegenerateSectionError(AutoPropError):
    """An airfoil section would have no thickness."""


class LoftError(AutoPropError):
    """Sections cannot be lofted into a closed surface."""


class OrderingError(LoftError):
    """Section stations are not strictly increasing."""


class FitError(AutoPropError):
    """Blades do not fit the hub."""


class HullParameterError(AutoPropError):
    """Hull parameters describe an impossible shell."""


class MeshValidityError(AutoPropError):
    """A mesh is malformed or not watertight where it must be."""


class StlParseError(AutoPropError):
    """An STL stream could not be parsed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class OperatingPointError(AutoPropError):
    """An operating point cannot be evaluated."""


class StressUndefinedError(AutoPropError):
    """Root stress is undefined for non-positive thrust."""


class ConfigurationError(AutoPropError):
    """The optimizer was configured with an infeasible starting point."""


class CommandParseError(AutoPropError):
    """A serial frame did not contain a known motion command."""

    def __init__(self, token: str):
        super().__init__(f"Unknown command token: {token!r}")
        self.token = token


class InsufficientDataError(AutoPropError):
    """A trace holds too few complete PWM periods to measure."""


class PlanningError(AutoPropError):
    """A design spec cannot be realized as a plan."""

    def __init__(self, constraint: str, message: str):
        super().__init__(f"Unsatisfiable constraint {constraint}: {message}")
        self.constraint = constraint


class OverrideError(AutoPropError):
    """A human-feedback override references an unknown plan field."""

    def __init__(self, path: str, message: Optional[str] = None):
        super().__init__(message or f"Unknown override path: {path}")
        self.path = path


class StageFailure(AutoPropError):
    """A pipeline stage failed."""
