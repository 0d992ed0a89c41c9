"""Light-cone-restricted reduced states and no-signalling checks.

The local state of particle ``i`` at lab time ``t`` is obtained by applying to the
initial state only the projections of events inside the closed past light cone
of ``(position_i, t)``, then tracing out every other particle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import PreconditionError, QueryError
from .qlinalg import DensityMatrix, MeasurementBasis, partial_trace
from .scenario import (
    MeasurementEvent,
    Run,
    Scenario,
    apply_events,
    check_run,
    enumerate_branches,
    ensure_valid,
    frame_global_state,
    marginal,
)
from .spacetime import Boost, CausalRelation, SpacetimePoint, boost, causal_relation, in_past_cone

__all__ = [
    "LocalStateQuery",
    "Variation",
    "VariationResult",
    "NoSignallingReport",
    "apex",
    "cone_events",
    "local_state",
    "frame_reduced_state",
    "conditional_reduced_state",
    "causal_predecessors",
    "linear_extensions",
    "apply_variation",
    "total_variation",
    "no_signalling_report",
]


@dataclass(frozen=True)
class LocalStateQuery:
    particle: int
    time: float


def apex(scenario: Scenario, query: LocalStateQuery) -> SpacetimePoint:
    if not 0 <= query.particle < scenario.n_particles:
        raise QueryError(f"particle {query.particle} does not exist")
    if not math.isfinite(query.time):
        raise QueryError("query time must be finite")
    if query.time < scenario.start_time:
        raise QueryError(
            f"query time {query.time} precedes the scenario start {scenario.start_time}"
        )
    return SpacetimePoint(query.time, scenario.position(query.particle))


def cone_events(
    scenario: Scenario, query: LocalStateQuery, frame: Boost | None = None
) -> list[MeasurementEvent]:
    """Events in the closed past cone of the query point, in processing order.

    With ``frame`` given, membership and ordering are evaluated on boosted
    coordinates; the result must describe the same physical set.
    """
    top = apex(scenario, query)
    if frame is None:
        chosen = [e for e in scenario.events if in_past_cone(top, scenario.point(e))]
        return sorted(chosen, key=MeasurementEvent.sort_key)
    top_b = boost(top, frame)
    boosted = [(boost(scenario.point(e), frame), e) for e in scenario.events]
    chosen = [(p, e) for p, e in boosted if in_past_cone(top_b, p)]
    chosen.sort(key=lambda pe: (pe[0].t, pe[1].event_id))
    return [e for _, e in chosen]


def conditional_reduced_state(
    scenario: Scenario, events: Sequence[MeasurementEvent], outcomes: Mapping[str, int], particle: int
) -> DensityMatrix:
    """Apply ``events`` (in the given order) with ``outcomes``, then keep ``particle``."""
    state = apply_events(scenario.initial_state, events, outcomes)
    return partial_trace(state, [particle])


def local_state(
    scenario: Scenario, run: Run, query: LocalStateQuery, frame: Boost | None = None
) -> DensityMatrix:
    check_run(scenario, run)
    events = cone_events(scenario, query, frame)
    return conditional_reduced_state(scenario, events, run.outcomes, query.particle)


def frame_reduced_state(scenario: Scenario, run: Run, query: LocalStateQuery) -> DensityMatrix:
    """Textbook reduced state in the lab frame (changes instantly on distant measurements)."""
    apex(scenario, query)
    state = frame_global_state(scenario, run, query.time)
    return partial_trace(state, [query.particle])


def causal_predecessors(scenario: Scenario, events: Sequence[MeasurementEvent]) -> dict[str, set[str]]:
    """For each event, the ids of the listed events strictly in its causal past."""
    preds: dict[str, set[str]] = {}
    for e in events:
        pe = scenario.point(e)
        preds[e.event_id] = {
            f.event_id
            for f in events
            if f is not e
            and causal_relation(pe, scenario.point(f))
            in (CausalRelation.TIMELIKE_PAST, CausalRelation.LIGHTLIKE_PAST)
        }
    return preds


def linear_extensions(scenario: Scenario, events: Sequence[MeasurementEvent]) -> Iterator[list[MeasurementEvent]]:
    """Every ordering of ``events`` compatible with their causal partial order."""
    preds = causal_predecessors(scenario, events)
    by_id = {e.event_id: e for e in events}

    def rec(placed: list[str], remaining: set[str]):
        if not remaining:
            yield [by_id[i] for i in placed]
            return
        for i in sorted(remaining):
            if preds[i] <= set(placed):
                yield from rec(placed + [i], remaining - {i})

    yield from rec([], set(by_id))


# no-signalling verification


@dataclass(frozen=True, eq=False)
class Variation:
    """An edit of a scenario: re-basing, removing and adding events."""

    description: str
    set_basis: Mapping[str, MeasurementBasis] = field(default_factory=dict)
    remove: tuple[str, ...] = ()
    add: tuple[MeasurementEvent, ...] = ()


@dataclass(frozen=True, eq=False)
class VariationResult:
    description: str
    marginal: np.ndarray
    tv: float


@dataclass(frozen=True, eq=False)
class NoSignallingReport:
    detector: str
    baseline: np.ndarray
    results: tuple[VariationResult, ...]
    label: str = "linear"

    @property
    def max_tv(self) -> float:
        return max((r.tv for r in self.results), default=0.0)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def apply_variation(base: Scenario, detector: str, variation: Variation) -> Scenario:
    """Return the edited scenario after checking every touched event is spacelike to the detector."""
    det = base.event(detector)
    det_point = base.point(det)

    def require_spacelike(e: MeasurementEvent):
        if e.event_id == detector:
            raise PreconditionError(f"{variation.description!r}: the detector itself may not be edited")
        rel = causal_relation(det_point, SpacetimePoint(e.time, base.position(e.particle)))
        if rel is not CausalRelation.SPACELIKE:
            raise PreconditionError(
                f"{variation.description!r}: event {e.event_id!r} is {rel.value} relative to the detector"
            )

    events = {e.event_id: e for e in base.events}
    for eid in variation.remove:
        if eid not in events:
            raise PreconditionError(f"{variation.description!r}: cannot remove unknown event {eid!r}")
        require_spacelike(events.pop(eid))
    for eid, basis in variation.set_basis.items():
        if eid not in events:
            raise PreconditionError(f"{variation.description!r}: cannot re-base unknown event {eid!r}")
        require_spacelike(events[eid])
        events[eid] = replace(events[eid], basis=basis)
    for e in variation.add:
        if not 0 <= e.particle < base.n_particles:
            raise PreconditionError(f"{variation.description!r}: added event on unknown particle {e.particle}")
        require_spacelike(e)
        if e.event_id in events:
            raise PreconditionError(f"{variation.description!r}: event id {e.event_id!r} already present")
        events[e.event_id] = e
    out = base.with_events(events.values())
    ensure_valid(out)
    return out


def no_signalling_report(
    base: Scenario, detector: str, variations: Iterable[Variation]
) -> NoSignallingReport:
    """Compare the detector's exact marginal across spacelike edits of the scenario.

    Forced outcomes are released to Born sampling first: an imposed distant
    outcome is a post-selection and would shift the detector statistics.
    """
    ensure_valid(base)
    released = base.released()
    variants = [
        (v.description, apply_variation(released, detector, v).released()) for v in variations
    ]
    baseline = marginal(enumerate_branches(released), detector)
    results = []
    for desc, sc in variants:
        m = marginal(enumerate_branches(sc), detector)
        results.append(VariationResult(desc, m, total_variation(baseline, m)))
    return NoSignallingReport(detector, baseline, tuple(results))
