"""Exception types raised across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Operands have incompatible Hilbert-space or spacetime dimensions."""


class ZeroProbabilityBranch(ArithmeticError):
    """A projection annihilated the state (impossible measurement outcome)."""

    def __init__(self, message: str, event_id: str | None = None):
        super().__init__(message)
        self.event_id = event_id


class ScenarioError(ValueError):
    """A scenario failed validation; ``issues`` holds the structured findings."""

    def __init__(self, issues):
        self.issues = list(issues)
        first = self.issues[0] if self.issues else None
        super().__init__(str(first) if first is not None else "invalid scenario")


class QueryError(ValueError):
    """A local-state query lies outside the region the scenario describes."""


class PreconditionError(ValueError):
    """A no-signalling variation touches an event that is not spacelike to the detector."""


class BranchLimitExceeded(RuntimeError):
    """Exact enumeration would expand more histories than allowed."""


class EventSnappingError(ValueError):
    """Events are too close together to be placed on the evolution time grid."""
