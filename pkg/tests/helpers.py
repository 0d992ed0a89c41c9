"""Random scenario generators shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from lightcone.localstate import Variation
from lightcone.qlinalg import MeasurementBasis, StateVector
from lightcone.scenario import MeasurementEvent, Particle, Scenario
from lightcone.spacetime import SpacetimePoint, causal_relation, CausalRelation, interval2


def random_state(rng, dims) -> StateVector:
    n = math.prod(dims)
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return StateVector(tuple(dims), z / np.linalg.norm(z))


def random_particles(rng, n, spatial_dim):
    return tuple(Particle(i, tuple(rng.uniform(-1.5, 1.5, spatial_dim)), 2) for i in range(n))


def random_scenario(rng, n_particles=None, n_events=None, spatial_dim=None, t_max=3.0, min_gap=0.0) -> Scenario:
    n_particles = n_particles or int(rng.integers(2, 4))
    n_events = int(rng.integers(0, 5)) if n_events is None else n_events
    spatial_dim = spatial_dim or int(rng.integers(1, 4))
    particles = random_particles(rng, n_particles, spatial_dim)
    events = []
    times: list[float] = []
    while len(events) < n_events:
        t = float(rng.uniform(0.1, t_max))
        if any(abs(t - s) <= min_gap for s in times):
            continue
        times.append(t)
        events.append(
            MeasurementEvent(
                f"e{len(events)}",
                int(rng.integers(0, n_particles)),
                t,
                MeasurementBasis.random(2, rng),
            )
        )
    return Scenario(spatial_dim, particles, random_state(rng, (2,) * n_particles), tuple(events), 0.0)


def spacelike_point_time(rng, scenario: Scenario, det: SpacetimePoint, particle: int, margin=0.05):
    """A time on ``particle``'s worldline strictly spacelike to ``det`` (None if impossible)."""
    d = math.dist(scenario.position(particle), det.x)
    lo, hi = max(det.t - d + margin, scenario.start_time + margin), det.t + d - margin
    if hi <= lo:
        return None
    return float(rng.uniform(lo, hi))


def random_nosignal_case(rng, n_variations=5):
    """Base scenario (with a detector event) plus spacelike variations; <= 4 events everywhere."""
    while True:
        n = int(rng.integers(2, 4))
        base = random_scenario(rng, n_particles=n, n_events=int(rng.integers(0, 4)))
        det_particle = int(rng.integers(0, n))
        det = MeasurementEvent("det", det_particle, float(rng.uniform(0.5, 2.5)), MeasurementBasis.random(2, rng))
        sc = base.with_events(base.events + (det,))
        det_point = sc.point(det)
        spacelike = [
            e for e in base.events if causal_relation(det_point, sc.point(e)) is CausalRelation.SPACELIKE
        ]
        others = [p for p in range(n) if p != det_particle]
        variations = []
        tries = 0
        while len(variations) < n_variations and tries < 100:
            tries += 1
            kind = rng.integers(0, 3)
            if kind == 0 and spacelike:
                e = spacelike[int(rng.integers(0, len(spacelike)))]
                variations.append(Variation(f"rebase {e.event_id}", {e.event_id: MeasurementBasis.random(2, rng)}))
            elif kind == 1 and spacelike:
                e = spacelike[int(rng.integers(0, len(spacelike)))]
                variations.append(Variation(f"remove {e.event_id}", remove=(e.event_id,)))
            elif len(sc.events) < 4:
                p = others[int(rng.integers(0, len(others)))]
                t = spacelike_point_time(rng, sc, det_point, p)
                if t is None or any(e.particle == p and abs(e.time - t) < 1e-6 for e in sc.events):
                    continue
                new = MeasurementEvent(f"add{len(variations)}", p, t, MeasurementBasis.random(2, rng))
                variations.append(Variation(f"add on particle {p}", add=(new,)))
        if len(variations) >= n_variations:
            return sc, "det", variations


def clear_of_band(scenario: Scenario, apex: SpacetimePoint, band=1e-6) -> bool:
    return all(
        abs(interval2(apex, scenario.point(e))) > band for e in scenario.events
    )
