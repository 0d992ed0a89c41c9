"""Experiment description, Born-rule sampling and exact outcome enumeration.

A scenario fixes N distinguishable particles at rest, a joint pure state valid
from ``start_time`` until the first measurement, and a list of projective
measurement events. Events are processed in increasing lab time; ties between
different particles are broken by ``event_id`` (their projectors commute).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import tolerances as tol
from .errors import BranchLimitExceeded, ScenarioError, ZeroProbabilityBranch
from .qlinalg import MeasurementBasis, StateVector, born_probabilities, project_normalize
from .spacetime import SpacetimePoint, interval2

__all__ = [
    "Particle",
    "MeasurementEvent",
    "Scenario",
    "Issue",
    "Run",
    "Branch",
    "BranchDistribution",
    "validate",
    "ensure_valid",
    "processing_order",
    "apply_events",
    "sample_run",
    "enumerate_branches",
    "frame_global_state",
    "marginal",
]


@dataclass(frozen=True)
class Particle:
    id: int
    position: tuple[float, ...]
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in np.atleast_1d(self.position)))


@dataclass(frozen=True, eq=False)
class MeasurementEvent:
    """Projective measurement of one particle at one lab time.

    ``forced_outcome`` of ``None`` means the outcome is drawn by the Born rule.
    """

    event_id: str
    particle: int
    time: float
    basis: MeasurementBasis
    forced_outcome: int | None = None

    @property
    def sampled(self) -> bool:
        return self.forced_outcome is None

    def sort_key(self) -> tuple[float, str]:
        return (self.time, self.event_id)


@dataclass(frozen=True, eq=False)
class Scenario:
    spatial_dim: int
    particles: tuple[Particle, ...]
    initial_state: StateVector
    events: tuple[MeasurementEvent, ...] = ()
    start_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "start_time", float(self.start_time))

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    def event(self, event_id: str) -> MeasurementEvent:
        for e in self.events:
            if e.event_id == event_id:
                return e
        raise KeyError(f"unknown event {event_id!r}")

    def position(self, particle: int) -> tuple[float, ...]:
        return self.particles[particle].position

    def point(self, event: MeasurementEvent) -> SpacetimePoint:
        return SpacetimePoint(event.time, self.position(event.particle))

    def with_events(self, events: Iterable[MeasurementEvent]) -> Scenario:
        return replace(self, events=tuple(events))

    def released(self) -> Scenario:
        """Copy with every forced outcome turned back into a Born-sampled one."""
        return self.with_events(replace(e, forced_outcome=None) for e in self.events)


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" or "warning"
    code: str
    message: str
    location: str = ""

    def __str__(self) -> str:
        where = f" at {self.location}" if self.location else ""
        return f"{self.severity}{where}: {self.message}"


def validate(scenario: Scenario) -> list[Issue]:
    """Check the scenario and return every finding; never raises."""
    try:
        return _validate(scenario)
    except Exception as exc:  # malformed objects should still produce a report
        return [Issue("error", "malformed", f"{type(exc).__name__}: {exc}")]


def _validate(s: Scenario) -> list[Issue]:
    issues: list[Issue] = []

    def err(code, msg, loc=""):
        issues.append(Issue("error", code, msg, loc))

    if not 1 <= s.spatial_dim <= 3:
        err("spatial_dim", f"spatial_dim must be 1, 2 or 3, got {s.spatial_dim}", "spatial_dim")
    if not math.isfinite(s.start_time):
        err("start_time", "start_time must be finite", "start_time")
    for i, p in enumerate(s.particles):
        loc = f"particles[{i}]"
        if p.id != i:
            err("particle_ids", f"particle ids must be dense 0..N-1 in order, found {p.id}", loc)
        if len(p.position) != s.spatial_dim:
            err("dimension mismatch", f"position has {len(p.position)} coordinates, spatial_dim is {s.spatial_dim}", loc)
        if not all(math.isfinite(c) for c in p.position):
            err("position", "position must be finite", loc)
        if p.dim < 2:
            err("particle_dim", f"particle dimension must be >= 2, got {p.dim}", loc)

    dims = tuple(p.dim for p in s.particles)
    if s.initial_state.dims != dims:
        err("dimension mismatch", f"initial state dims {s.initial_state.dims} do not match particle dims {dims}", "initial_state")
    elif not s.initial_state.is_normalized():
        err("normalization", f"initial state norm {s.initial_state.norm:.12g} != 1", "initial_state")

    seen: dict[str, int] = {}
    for k, e in enumerate(s.events):
        loc = f"events[{k}]"
        if e.event_id in seen:
            err("duplicate_event_id", f"event id {e.event_id!r} used twice", loc)
        seen[e.event_id] = k
        if not 0 <= e.particle < s.n_particles:
            err("unknown_particle", f"event refers to particle {e.particle}", loc)
            continue
        if not math.isfinite(e.time):
            err("time", "event time must be finite", loc)
        elif e.time < s.start_time:
            err("before_start", f"event time {e.time} precedes start_time {s.start_time}", loc)
        if e.basis.site_dim != s.particles[e.particle].dim:
            err("dimension mismatch", f"basis dim {e.basis.site_dim} != particle dim {s.particles[e.particle].dim}", loc)
        if e.forced_outcome is not None and not 0 <= e.forced_outcome < e.basis.site_dim:
            err("forced_outcome", f"forced outcome {e.forced_outcome} out of range", loc)
    if any(i.severity == "error" for i in issues):
        return issues

    evs = list(s.events)
    for a_idx in range(len(evs)):
        for b_idx in range(a_idx + 1, len(evs)):
            a, b = evs[a_idx], evs[b_idx]
            if a.particle == b.particle:
                if abs(a.time - b.time) <= tol.COINCIDENCE:
                    err(
                        "ambiguous same-worldline order",
                        f"events {a.event_id!r} and {b.event_id!r} on particle {a.particle} are simultaneous",
                        f"events[{b_idx}]",
                    )
            elif abs(interval2(s.point(a), s.point(b))) < tol.LIGHTLIKE_BAND:
                issues.append(
                    Issue(
                        "warning",
                        "lightlike_pair",
                        f"events {a.event_id!r} and {b.event_id!r} are lightlike separated",
                        f"events[{b_idx}]",
                    )
                )
    return issues


def ensure_valid(scenario: Scenario) -> None:
    errors = [i for i in validate(scenario) if i.severity == "error"]
    if errors:
        raise ScenarioError(errors)


def processing_order(events: Iterable[MeasurementEvent]) -> list[MeasurementEvent]:
    return sorted(events, key=MeasurementEvent.sort_key)


@dataclass(frozen=True)
class Run:
    """One realized measurement history."""

    outcomes: Mapping[str, int]
    seed: int | None = None

    def __getitem__(self, event_id: str) -> int:
        return self.outcomes[event_id]


def check_run(scenario: Scenario, run: Run) -> None:
    for e in scenario.events:
        if e.event_id not in run.outcomes:
            raise ValueError(f"run has no outcome for event {e.event_id!r}")
        o = run.outcomes[e.event_id]
        if not 0 <= o < e.basis.site_dim:
            raise ValueError(f"run outcome {o} out of range for event {e.event_id!r}")
        if e.forced_outcome is not None and o != e.forced_outcome:
            raise ValueError(f"run outcome {o} contradicts forced outcome of {e.event_id!r}")


def apply_events(
    state: StateVector, events: Sequence[MeasurementEvent], outcomes: Mapping[str, int]
) -> StateVector:
    """Apply the projectors of ``events`` in the given order, renormalizing each time."""
    for e in events:
        try:
            state, _ = project_normalize(state, e.basis, e.particle, outcomes[e.event_id])
        except ZeroProbabilityBranch as exc:
            raise ZeroProbabilityBranch(
                f"event {e.event_id!r}: outcome {outcomes[e.event_id]} is impossible", e.event_id
            ) from exc
    return state


def _draw(probs: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, len(probs) - 1)


def sample_run(scenario: Scenario, seed: int | None = None) -> Run:
    ensure_valid(scenario)
    rng = np.random.default_rng(seed)
    state = scenario.initial_state
    outcomes: dict[str, int] = {}
    for e in processing_order(scenario.events):
        if e.forced_outcome is None:
            outcome = _draw(born_probabilities(state, e.basis, e.particle), rng)
        else:
            outcome = e.forced_outcome
        outcomes[e.event_id] = outcome
        state = apply_events(state, [e], outcomes)
    return Run(outcomes, seed)


@dataclass(frozen=True, eq=False)
class Branch:
    outcomes: tuple[int, ...]
    probability: float
    state: StateVector


@dataclass(frozen=True, eq=False)
class BranchDistribution:
    """Exact outcome distribution; ``outcomes`` tuples follow ``event_ids`` order."""

    event_ids: tuple[str, ...]
    outcome_counts: tuple[int, ...]
    branches: tuple[Branch, ...]

    @property
    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {b.outcomes: b.probability for b in self.branches}

    def branch(self, outcomes: Sequence[int]) -> Branch:
        outcomes = tuple(outcomes)
        for b in self.branches:
            if b.outcomes == outcomes:
                return b
        raise KeyError(outcomes)


def check_branch_budget(events: Sequence[MeasurementEvent]) -> None:
    total = math.prod(e.basis.site_dim for e in events if e.forced_outcome is None)
    if total > tol.MAX_BRANCHES:
        raise BranchLimitExceeded(f"{total} histories exceed the limit {tol.MAX_BRANCHES}")


def enumerate_branches(scenario: Scenario) -> BranchDistribution:
    """Depth-first expansion over every outcome history.

    A forced event contributes a factor of one (the outcome is imposed, as in
    :func:`sample_run`), so the distribution is exactly the one sampled runs follow.
    """
    ensure_valid(scenario)
    order = processing_order(scenario.events)
    check_branch_budget(order)
    leaves: list[Branch] = []

    def expand(depth: int, state: StateVector, prob: float, prefix: tuple[int, ...]):
        if depth == len(order):
            leaves.append(Branch(prefix, prob, state))
            return
        e = order[depth]
        if e.forced_outcome is not None:
            nxt = apply_events(state, [e], {e.event_id: e.forced_outcome})
            expand(depth + 1, nxt, prob, prefix + (e.forced_outcome,))
            return
        probs = born_probabilities(state, e.basis, e.particle)
        for j, pj in enumerate(probs):
            if pj < tol.ZERO_PROBABILITY:
                continue
            nxt, _ = project_normalize(state, e.basis, e.particle, j)
            expand(depth + 1, nxt, prob * float(pj), prefix + (j,))

    expand(0, scenario.initial_state, 1.0, ())
    return BranchDistribution(
        tuple(e.event_id for e in order),
        tuple(e.basis.site_dim for e in order),
        tuple(leaves),
    )


def frame_global_state(scenario: Scenario, run: Run, t: float) -> StateVector:
    """Lab-frame textbook state: all projections with ``event.time <= t`` applied."""
    check_run(scenario, run)
    done = [e for e in processing_order(scenario.events) if e.time <= t]
    return apply_events(scenario.initial_state, done, run.outcomes)


def marginal(distribution: BranchDistribution, event_id: str) -> np.ndarray:
    try:
        k = distribution.event_ids.index(event_id)
    except ValueError:
        raise KeyError(f"unknown event {event_id!r}") from None
    out = np.zeros(distribution.outcome_counts[k])
    for b in distribution.branches:
        out[b.outcomes[k]] += b.probability
    return out
