"""The Earth/Callisto readout-machine scenario and its standard variations.

Particle 0 sits on Earth at x = 0, particle 1 on Callisto one light-hour away.
The pair starts in the singlet. At noon (t = 12 h) the Callisto experimenter
measures particle 1 in ``{c|0> + d|1>, conj(d)|0> - conj(c)|1>}`` and obtains
the second vector, which leaves the Earth qubit in ``c|0> + d|1>``.
"""

from __future__ import annotations

from .localstate import Variation
from .qlinalg import MeasurementBasis, singlet
from .scenario import MeasurementEvent, Particle, Scenario

EARTH = 0
CALLISTO = 1
REMOTE = "remote"
DETECTOR = "detector"
NOON = 12.0
DETECTOR_TIME = 12.5


def golden_scenario(c: complex = 0.6, d: complex = 0.8) -> Scenario:
    c, d = complex(c), complex(d)
    if abs(c.imag) > 0 or c.real <= 0:
        raise ValueError("c must be real and positive")
    if abs(abs(c) ** 2 + abs(d) ** 2 - 1.0) > 1e-12:
        raise ValueError("|c|^2 + |d|^2 must equal 1")
    basis = MeasurementBasis.from_coefficients(c.real, d)
    return Scenario(
        spatial_dim=1,
        particles=(Particle(EARTH, (0.0,)), Particle(CALLISTO, (1.0,))),
        initial_state=singlet(),
        events=(MeasurementEvent(REMOTE, CALLISTO, NOON, basis, forced_outcome=1),),
        start_time=0.0,
    )


def detector_event(basis: MeasurementBasis | None = None, time: float = DETECTOR_TIME) -> MeasurementEvent:
    """Earth-side measurement spacelike to the noon event on Callisto (default basis X)."""
    return MeasurementEvent(DETECTOR, EARTH, time, basis or MeasurementBasis.pauli_x())


def with_detector(scenario: Scenario, basis: MeasurementBasis | None = None, time: float = DETECTOR_TIME) -> Scenario:
    return scenario.with_events(scenario.events + (detector_event(basis, time),))


def remote_variations(c: complex = 0.6, d: complex = 0.8) -> list[Variation]:
    """Callisto basis choices: Z, X, Y, no measurement, and the base basis with d -> +-i d.

    The phase-rotated bases matter for the z-field coupling. Under Z, X, Y or no
    measurement the branch-averaged Earth phase is symmetric and the X detector
    reads 1/2; the rotated bases break that symmetry and enlarge the
    frame-mode signal.
    """
    c, d = complex(c), complex(d)
    rot = 1j * d
    return [
        Variation("remote measures Z", {REMOTE: MeasurementBasis.computational()}),
        Variation("remote measures X", {REMOTE: MeasurementBasis.pauli_x()}),
        Variation("remote measures Y", {REMOTE: MeasurementBasis.pauli_y()}),
        Variation("remote does not measure", remove=(REMOTE,)),
        Variation("remote measures (c, i d)", {REMOTE: MeasurementBasis.from_coefficients(c.real, rot)}),
        Variation("remote measures (c, -i d)", {REMOTE: MeasurementBasis.from_coefficients(c.real, -rot)}),
    ]
