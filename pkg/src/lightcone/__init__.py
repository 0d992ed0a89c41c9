"""Light-cone local states of entangled particles under projective measurement.

The local state of a particle at a spacetime point conditions only on the
measurements in that point's past light cone. This package computes it,
contrasts it with the lab-frame textbook state, checks no-signalling by exact
enumeration, emulates a light-speed readout network, and evolves particles
under Hamiltonians that depend on either state.
"""

__version__ = "0.1.0"

from .errors import (
    BranchLimitExceeded,
    DimensionError,
    EventSnappingError,
    PreconditionError,
    QueryError,
    ScenarioError,
    ZeroProbabilityBranch,
)
from .localstate import LocalStateQuery, cone_events, frame_reduced_state, local_state, no_signalling_report
from .qlinalg import DensityMatrix, MeasurementBasis, StateVector
from .scenario import MeasurementEvent, Particle, Run, Scenario, enumerate_branches, sample_run
from .spacetime import Boost, CausalRelation, SpacetimePoint

__all__ = [
    "BranchLimitExceeded",
    "DimensionError",
    "EventSnappingError",
    "PreconditionError",
    "QueryError",
    "ScenarioError",
    "ZeroProbabilityBranch",
    "LocalStateQuery",
    "cone_events",
    "frame_reduced_state",
    "local_state",
    "no_signalling_report",
    "DensityMatrix",
    "MeasurementBasis",
    "StateVector",
    "MeasurementEvent",
    "Particle",
    "Run",
    "Scenario",
    "enumerate_branches",
    "sample_run",
    "Boost",
    "CausalRelation",
    "SpacetimePoint",
    "__version__",
]
