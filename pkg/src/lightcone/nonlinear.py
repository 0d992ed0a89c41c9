"""Evolution under local Hamiltonian terms that depend on a reduced state.

Each particle ``i`` feels ``H_i = coupling_field(rho_i)``. The reduced state
``rho_i`` is either its local state (causal: only projections inside the past
light cone of ``(x_i, t)`` are applied) or its lab-frame reduced state (the
textbook state, which lets a distant measurement steer the local Hamiltonian
instantly and therefore signals).

Time is discretized on a uniform grid ``start_time + k*dt``. At each grid
point the events snapped to it are applied first (branching by the Born rule),
then every particle is stepped with ``exp(-i H_i dt)`` with ``H_i`` evaluated at
the start of the step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from . import tolerances as tol
from .errors import DimensionError, EventSnappingError, ZeroProbabilityBranch
from .localstate import NoSignallingReport, Variation, VariationResult, apply_variation, total_variation
from .qlinalg import DensityMatrix, StateVector, _apply_site, born_probabilities, project_normalize
from .scenario import (
    Branch,
    BranchDistribution,
    MeasurementEvent,
    Scenario,
    check_branch_budget,
    ensure_valid,
    marginal,
    processing_order,
)
from .spacetime import SpacetimePoint, in_past_cone

__all__ = [
    "CouplingMode",
    "CouplingSpec",
    "register_coupling",
    "coupling_field",
    "NonlinearBranch",
    "NonlinearBranchDistribution",
    "evolve_nonlinear",
    "signalling_scan",
    "DEFAULT_DT",
]

DEFAULT_DT = 0.01

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class CouplingMode(enum.Enum):
    LOCAL = "local"
    FRAME = "frame"

    @property
    def label(self) -> str:
        return "local" if self is CouplingMode.LOCAL else "frame (non-causal)"


_CUSTOM: dict[str, Callable[[np.ndarray, "CouplingSpec"], np.ndarray]] = {}


def register_coupling(name: str, fn: Callable[[np.ndarray, "CouplingSpec"], np.ndarray]) -> None:
    """Register a map from a site density matrix (ndarray) to a Hermitian site operator."""
    _CUSTOM[name] = fn


@dataclass(frozen=True)
class CouplingSpec:
    """Per-particle coupling; ``kind`` is ``"zfield"`` or ``"custom"``.

    ``zfield`` produces ``g * <r|rho|r> * sigma_z`` with ``r = reference``.
    """

    kind: str = "zfield"
    g: float = math.pi / 4
    reference: int = 0
    custom: str | None = None

    def __post_init__(self):
        if self.kind not in ("zfield", "custom"):
            raise ValueError(f"unknown coupling kind {self.kind!r}")
        if self.kind == "custom" and self.custom not in _CUSTOM:
            raise ValueError(f"no custom coupling registered as {self.custom!r}")
        if not math.isfinite(self.g):
            raise ValueError("coupling strength must be finite")


def coupling_field(rho, spec: CouplingSpec) -> np.ndarray:
    r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if spec.kind == "zfield":
        if r.shape != (2, 2):
            raise DimensionError("the z-field coupling is defined for qubits only")
        if not 0 <= spec.reference < 2:
            raise DimensionError(f"reference index {spec.reference} out of range")
        h = spec.g * float(np.real(r[spec.reference, spec.reference])) * SIGMA_Z
    else:
        h = np.asarray(_CUSTOM[spec.custom](r, spec), dtype=complex)
        if h.shape != r.shape:
            raise DimensionError(f"custom coupling returned shape {h.shape}, expected {r.shape}")
    if not np.allclose(h, h.conj().T, atol=tol.STRUCTURAL, rtol=0):
        raise ValueError("coupling operator is not Hermitian")
    if np.linalg.norm(h, 2) > 10 * abs(spec.g) + tol.STRUCTURAL:
        raise ValueError("coupling operator exceeds the norm bound 10*|g|")
    return h


def _step_unitary(h: np.ndarray, dt: float) -> np.ndarray:
    if not np.any(h - np.diag(np.diag(h))):
        return np.diag(np.exp(-1j * dt * np.real(np.diag(h))))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * dt * w)) @ v.conj().T


def _reduced(amps: np.ndarray, dims: tuple[int, ...], site: int) -> np.ndarray:
    t = np.moveaxis(amps.reshape(dims), site, 0).reshape(dims[site], -1)
    rho = t @ t.conj().T
    return rho / np.real(np.trace(rho))


@dataclass(frozen=True, eq=False)
class NonlinearBranch(Branch):
    """Branch with its applied step unitaries and the reduced states that produced them.

    ``unitaries[k]`` and ``coupling_states[k]`` hold one entry per particle for
    the step starting at grid time ``k``.
    """

    unitaries: tuple = ()
    coupling_states: tuple = ()


@dataclass(frozen=True, eq=False)
class NonlinearBranchDistribution(BranchDistribution):
    dt: float = DEFAULT_DT
    mode: CouplingMode = CouplingMode.LOCAL
    start_time: float = 0.0
    n_steps: int = 0

    def grid_time(self, k: int) -> float:
        return self.start_time + k * self.dt


class _Live:
    """Mutable per-branch bookkeeping during evolution."""

    __slots__ = ("outcomes", "prob", "amps", "history", "replay", "unitaries", "rhos")

    def __init__(self, outcomes, prob, amps, history, replay, unitaries, rhos):
        self.outcomes = outcomes
        self.prob = prob
        self.amps = amps
        self.history = history
        self.replay = replay
        self.unitaries = unitaries
        self.rhos = rhos

    def child(self, event: MeasurementEvent, outcome: int, prob: float, amps: np.ndarray) -> _Live:
        return _Live(
            self.outcomes + (outcome,),
            prob,
            amps,
            self.history + [("P", event, outcome)],
            dict(self.replay),
            list(self.unitaries),
            list(self.rhos),
        )


def snap_events(scenario: Scenario, dt: float, horizon: float) -> list[tuple[int, MeasurementEvent]]:
    """Move events to the nearest grid point; enforce the 2*dt separation rule."""
    ordered = processing_order(scenario.events)
    for a, b in zip(ordered, ordered[1:]):
        if b.time - a.time <= 2 * dt:
            raise EventSnappingError(
                f"events {a.event_id!r} and {b.event_id!r} are within 2*dt = {2 * dt} h"
            )
    n_steps = int(round((horizon - scenario.start_time) / dt))
    out = []
    for e in ordered:
        k = int(round((e.time - scenario.start_time) / dt))
        if k > n_steps:
            raise ValueError(f"event {e.event_id!r} at {e.time} lies beyond the horizon {horizon}")
        out.append((k, replace(e, time=scenario.start_time + k * dt)))
    return out


def evolve_nonlinear(
    scenario: Scenario,
    spec: CouplingSpec,
    mode: CouplingMode = CouplingMode.LOCAL,
    dt: float = DEFAULT_DT,
    horizon: float | None = None,
) -> NonlinearBranchDistribution:
    ensure_valid(scenario)
    mode = CouplingMode(mode)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if horizon is None:
        horizon = max((e.time for e in scenario.events), default=scenario.start_time)
    if horizon < scenario.start_time:
        raise ValueError("horizon precedes the scenario start")
    check_branch_budget(scenario.events)

    t0 = scenario.start_time
    n_steps = int(round((horizon - t0) / dt))
    snapped = snap_events(scenario, dt, horizon)
    at_step: dict[int, MeasurementEvent] = {k: e for k, e in snapped}
    dims = scenario.initial_state.dims
    n = len(dims)
    positions = [scenario.position(i) for i in range(n)]
    event_points = {e.event_id: SpacetimePoint(e.time, positions[e.particle]) for _, e in snapped}

    def cone_ids(particle: int, k: int, n_applied: int) -> frozenset:
        top = SpacetimePoint(t0 + k * dt, positions[particle])
        return frozenset(
            e.event_id for _, e in snapped[:n_applied] if in_past_cone(top, event_points[e.event_id])
        )

    def replay(history: list, allowed: frozenset) -> np.ndarray:
        amps = scenario.initial_state.amplitudes
        for op in history:
            if op[0] == "U":
                for site, u in enumerate(op[1]):
                    amps = _apply_site(amps, dims, u, site)
            elif op[1].event_id in allowed:
                e, o = op[1], op[2]
                try:
                    sv, _ = project_normalize(StateVector(dims, amps), e.basis, e.particle, o)
                except ZeroProbabilityBranch as exc:
                    raise ZeroProbabilityBranch(f"replay of {e.event_id!r} annihilated the state", e.event_id) from exc
                amps = sv.amplitudes
        return amps

    live = [_Live((), 1.0, scenario.initial_state.amplitudes, [], {}, [], [])]
    for k in range(n_steps + 1):
        e = at_step.get(k)
        if e is not None:
            nxt = []
            for br in live:
                sv = StateVector(dims, br.amps)
                if e.forced_outcome is not None:
                    try:
                        post, _ = project_normalize(sv, e.basis, e.particle, e.forced_outcome)
                    except ZeroProbabilityBranch as exc:
                        raise ZeroProbabilityBranch(
                            f"event {e.event_id!r}: forced outcome {e.forced_outcome} is impossible", e.event_id
                        ) from exc
                    nxt.append(br.child(e, e.forced_outcome, br.prob, post.amplitudes))
                    continue
                probs = born_probabilities(sv, e.basis, e.particle)
                for j, pj in enumerate(probs):
                    if pj < tol.ZERO_PROBABILITY:
                        continue
                    post, _ = project_normalize(sv, e.basis, e.particle, j)
                    nxt.append(br.child(e, j, br.prob * float(pj), post.amplitudes))
            live = nxt
        if k == n_steps:
            break
        for br in live:
            rhos = []
            for i in range(n):
                if mode is CouplingMode.FRAME:
                    src = br.amps
                else:
                    ids = cone_ids(i, k, len(br.outcomes))
                    cached = br.replay.get(i)
                    if cached is None or cached[0] != ids:
                        cached = (ids, replay(br.history, ids))
                        br.replay[i] = cached
                    src = cached[1]
                rhos.append(_reduced(src, dims, i))
            us = tuple(_step_unitary(coupling_field(r, spec), dt) for r in rhos)
            for site, u in enumerate(us):
                br.amps = _apply_site(br.amps, dims, u, site)
                for i, (ids, amps) in list(br.replay.items()):
                    br.replay[i] = (ids, _apply_site(amps, dims, u, site))
            br.history.append(("U", us))
            br.unitaries.append(us)
            br.rhos.append(tuple(rhos))

    branches = tuple(
        NonlinearBranch(
            br.outcomes,
            br.prob,
            StateVector(dims, br.amps / np.linalg.norm(br.amps)),
            tuple(br.unitaries),
            tuple(br.rhos),
        )
        for br in live
    )
    return NonlinearBranchDistribution(
        tuple(e.event_id for _, e in snapped),
        tuple(e.basis.site_dim for _, e in snapped),
        branches,
        dt=dt,
        mode=mode,
        start_time=t0,
        n_steps=n_steps,
    )


def signalling_scan(
    scenario: Scenario,
    spec: CouplingSpec,
    mode: CouplingMode,
    detector: str,
    variations: Iterable[Variation],
    dt: float = DEFAULT_DT,
) -> NoSignallingReport:
    """Detector marginals under nonlinear evolution across spacelike edits.

    As in the linear check, forced outcomes are released to Born sampling.
    """
    mode = CouplingMode(mode)
    ensure_valid(scenario)
    released = scenario.released()
    variants = [
        (v.description, apply_variation(released, detector, v).released()) for v in variations
    ]
    baseline = marginal(evolve_nonlinear(released, spec, mode, dt), detector)
    results = []
    for desc, sc in variants:
        m = marginal(evolve_nonlinear(sc, spec, mode, dt), detector)
        results.append(VariationResult(desc, m, total_variation(baseline, m)))
    return NoSignallingReport(detector, baseline, tuple(results), label=mode.label)
