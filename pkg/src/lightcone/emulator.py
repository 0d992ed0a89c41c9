"""Light-speed broadcast network that emulates a local-state readout device.

Every particle hosts a node. When a measurement happens, its source node
broadcasts (particle, basis, outcome) at light speed; a node learns of the
event at ``event.time + distance``. Each node displays the state it can
reconstruct from the initial state and the messages it holds, and nothing else.
"""

from __future__ import annotations

import bisect
import heapq
from dataclasses import dataclass, field

from .errors import ZeroProbabilityBranch
from .localstate import LocalStateQuery, local_state
from .qlinalg import DensityMatrix, MeasurementBasis, partial_trace, project_normalize, trace_distance
from .scenario import Run, Scenario, check_run, ensure_valid
from .spacetime import SpacetimePoint, distance


@dataclass(frozen=True, eq=False)
class Message:
    event_id: str
    emission: SpacetimePoint
    particle: int
    basis: MeasurementBasis
    outcome: int


@dataclass(frozen=True)
class Arrival:
    time: float
    event_id: str
    node: int


@dataclass
class NodeTimeline:
    """Displayed-state revisions of one node, in strictly increasing time."""

    node: int
    revisions: list[tuple[float, DensityMatrix]] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.revisions]

    def displayed(self, t: float) -> DensityMatrix:
        """State on display at time ``t`` (a revision at ``t`` is already visible)."""
        k = bisect.bisect_right(self.times, t) - 1
        if k < 0:
            raise ValueError(f"time {t} precedes the first revision at {self.revisions[0][0]}")
        return self.revisions[k][1]


def schedule_arrivals(scenario: Scenario) -> dict[int, list[Arrival]]:
    ensure_valid(scenario)
    out: dict[int, list[Arrival]] = {p.id: [] for p in scenario.particles}
    for e in scenario.events:
        src = scenario.position(e.particle)
        for p in scenario.particles:
            out[p.id].append(Arrival(e.time + distance(src, p.position), e.event_id, p.id))
    for arrivals in out.values():
        arrivals.sort(key=lambda a: (a.time, a.event_id))
    return out


def _reconstruct(scenario: Scenario, node: int, received: list[Message]) -> DensityMatrix:
    state = scenario.initial_state
    for m in sorted(received, key=lambda m: (m.emission.t, m.event_id)):
        try:
            state, _ = project_normalize(state, m.basis, m.particle, m.outcome)
        except ZeroProbabilityBranch as exc:
            raise ZeroProbabilityBranch(
                f"event {m.event_id!r}: outcome {m.outcome} is impossible", m.event_id
            ) from exc
    return partial_trace(state, [node])


def run_network(scenario: Scenario, run: Run) -> list[NodeTimeline]:
    ensure_valid(scenario)
    check_run(scenario, run)
    messages = {
        e.event_id: Message(e.event_id, scenario.point(e), e.particle, e.basis, run.outcomes[e.event_id])
        for e in scenario.events
    }
    queue = [(a.time, a.event_id, a.node) for arr in schedule_arrivals(scenario).values() for a in arr]
    heapq.heapify(queue)

    inbox: dict[int, list[Message]] = {p.id: [] for p in scenario.particles}
    timelines = {
        p.id: NodeTimeline(p.id, [(scenario.start_time, _reconstruct(scenario, p.id, []))])
        for p in scenario.particles
    }
    while queue:
        t, eid, node = heapq.heappop(queue)
        inbox[node].append(messages[eid])
        shown = _reconstruct(scenario, node, inbox[node])
        revs = timelines[node].revisions
        if t <= revs[-1][0]:
            # simultaneous arrivals (or an arrival at the start) collapse into one revision
            revs[-1] = (revs[-1][0], shown)
        else:
            revs.append((t, shown))
    return [timelines[p.id] for p in scenario.particles]


def check_equivalence(scenario: Scenario, run: Run, times) -> float:
    """Largest trace distance between node displays and the geometric local state."""
    worst = 0.0
    for tl in run_network(scenario, run):
        for t in times:
            oracle = local_state(scenario, run, LocalStateQuery(tl.node, float(t)))
            worst = max(worst, trace_distance(tl.displayed(float(t)), oracle))
    return worst
