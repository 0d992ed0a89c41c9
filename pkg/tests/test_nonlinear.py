import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightcone.errors import DimensionError, EventSnappingError
from lightcone.golden import EARTH, golden_scenario, remote_variations, with_detector
from lightcone.localstate import Variation
from lightcone.nonlinear import (
    CouplingMode,
    CouplingSpec,
    coupling_field,
    evolve_nonlinear,
    register_coupling,
    signalling_scan,
)
from lightcone.qlinalg import DensityMatrix, MeasurementBasis, StateVector, same_ray
from lightcone.scenario import MeasurementEvent, Particle, Scenario, enumerate_branches, marginal

from helpers import random_scenario
from oracles import golden_frame_marginal, nonlinear_branches

SZ = np.diag([1.0, -1.0])
Z = MeasurementBasis.computational()
X = MeasurementBasis.pauli_x()
FRAME_WITNESS = 0.0688198976869
LOCAL, FRAME = CouplingMode.LOCAL, CouplingMode.FRAME


def test_coupling_field_examples():
    spec = CouplingSpec()
    np.testing.assert_allclose(coupling_field(np.diag([1, 0]), spec), math.pi / 4 * SZ, atol=1e-15)
    np.testing.assert_allclose(coupling_field(np.diag([0, 1]), spec), np.zeros((2, 2)), atol=1e-15)
    np.testing.assert_allclose(coupling_field(np.eye(2) / 2, spec), math.pi / 8 * SZ, atol=1e-15)
    np.testing.assert_allclose(
        coupling_field(np.diag([0, 1]), CouplingSpec(reference=1)), math.pi / 4 * SZ, atol=1e-15
    )


def test_coupling_field_qubits_only():
    with pytest.raises(DimensionError):
        coupling_field(np.eye(3) / 3, CouplingSpec())


def test_custom_coupling_registry():
    register_coupling("x-drive", lambda rho, spec: spec.g * np.real(rho[0, 1]) * np.array([[0, 1], [1, 0]]))
    spec = CouplingSpec(kind="custom", g=1.0, custom="x-drive")
    np.testing.assert_allclose(coupling_field(np.full((2, 2), 0.5), spec), [[0, 0.5], [0.5, 0]])
    register_coupling("too-big", lambda rho, spec: 100 * np.eye(2))
    with pytest.raises(ValueError):
        coupling_field(np.eye(2) / 2, CouplingSpec(kind="custom", g=1.0, custom="too-big"))
    with pytest.raises(ValueError):
        CouplingSpec(kind="custom", custom="never-registered")


def test_free_qubit_phase():
    # a lone qubit in |+> with population 1/2 on the reference level
    s = 1 / math.sqrt(2)
    sc = Scenario(1, (Particle(0, (0.0,)),), StateVector((2,), [s, s]), ())
    dist = evolve_nonlinear(sc, CouplingSpec(), LOCAL, dt=0.01, horizon=1.0)
    (branch,) = dist.branches
    a = branch.state.amplitudes
    expect_x = 2 * np.real(np.conj(a[0]) * a[1])
    # relative phase is 2 * g * p * t = pi/4
    assert expect_x == pytest.approx(math.cos(math.pi / 4), abs=1e-12)


def test_zero_coupling_matches_linear_golden():
    sc = with_detector(golden_scenario())
    lin = enumerate_branches(sc.released())
    non = evolve_nonlinear(sc.released(), CouplingSpec(g=0.0), LOCAL)
    assert non.probabilities() == pytest.approx(lin.probabilities(), abs=1e-12)
    for b in non.branches:
        assert same_ray(b.state, lin.branch(b.outcomes).state)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_zero_coupling_matches_linear_random(seed):
    rng = np.random.default_rng(seed)
    sc = random_scenario(rng, n_events=int(rng.integers(0, 4)), min_gap=0.11)
    lin = enumerate_branches(sc)
    non = evolve_nonlinear(sc, CouplingSpec(g=0.0), FRAME, dt=0.05)
    # snapping moves events; with g = 0 that changes nothing
    assert non.probabilities() == pytest.approx(lin.probabilities(), abs=1e-12)


def test_golden_local_coupling_state_before_arrival():
    sc = with_detector(golden_scenario(), time=13.5)
    dist = evolve_nonlinear(sc, CouplingSpec(), LOCAL, dt=0.01, horizon=13.5)
    assert dist.n_steps == 1350
    for b in dist.branches:
        earth = np.array([rhos[EARTH] for rhos in b.coupling_states])
        np.testing.assert_allclose(earth[:1300], np.broadcast_to(np.eye(2) / 2, (1300, 2, 2)), atol=1e-12)
        assert abs(earth[1300][0, 0] - 0.36) < 1e-9


def test_golden_frame_coupling_state_changes_at_noon():
    dist = evolve_nonlinear(golden_scenario(), CouplingSpec(), FRAME, dt=0.01, horizon=12.5)
    (b,) = dist.branches
    np.testing.assert_allclose(b.coupling_states[1199][EARTH], np.eye(2) / 2, atol=1e-12)
    assert b.coupling_states[1200][EARTH][0, 0] == pytest.approx(0.36, abs=1e-12)


def _oracle_case(sc, mode, dt, horizon, g=math.pi / 4):
    t0 = sc.start_time
    events = [
        (int(round((e.time - t0) / dt)), e.particle, e.basis.vectors, e.forced_outcome)
        for e in sorted(sc.events, key=lambda e: (e.time, e.event_id))
    ]
    n_steps = int(round((horizon - t0) / dt))
    positions = [sc.position(i) for i in range(sc.n_particles)]
    return nonlinear_branches(
        sc.initial_state.dims, positions, sc.initial_state.amplitudes, events, g, 0, mode, dt, t0, n_steps
    )


@pytest.mark.parametrize("mode", [LOCAL, FRAME])
@pytest.mark.parametrize("forced", [True, False])
def test_golden_matches_brute_force(mode, forced):
    sc = replace(with_detector(golden_scenario(), time=12.5), start_time=11.0)
    if not forced:
        sc = sc.released()
    oracle = _oracle_case(sc, mode.value, 0.05, 13.5)
    dist = evolve_nonlinear(sc, CouplingSpec(), mode, dt=0.05, horizon=13.5)
    assert set(oracle) == {b.outcomes for b in dist.branches}
    for b in dist.branches:
        prob, psi = oracle[b.outcomes]
        assert b.probability == pytest.approx(prob, abs=1e-12)
        assert abs(abs(np.vdot(psi, b.state.amplitudes)) - 1) < 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), mode=st.sampled_from([LOCAL, FRAME]))
def test_random_three_qubits_match_brute_force(seed, mode):
    rng = np.random.default_rng(seed)
    sc = random_scenario(rng, n_particles=3, n_events=3, t_max=1.5, min_gap=0.21)
    g = float(rng.uniform(0.5, 3.0))
    oracle = _oracle_case(sc, mode.value, 0.1, 2.0, g=g)
    dist = evolve_nonlinear(sc, CouplingSpec(g=g), mode, dt=0.1, horizon=2.0)
    for b in dist.branches:
        prob, psi = oracle[b.outcomes]
        assert b.probability == pytest.approx(prob, abs=1e-12)
        assert abs(abs(np.vdot(psi, b.state.amplitudes)) - 1) < 1e-10


def test_frame_marginals_match_closed_form():
    sc = with_detector(golden_scenario())
    report = signalling_scan(sc, CouplingSpec(), FRAME, "detector", remote_variations())
    base = MeasurementBasis.from_coefficients(0.6, 0.8)
    np.testing.assert_allclose(report.baseline, golden_frame_marginal(base.vectors), atol=1e-12)
    for v, r in zip(remote_variations(), report.results):
        b = v.set_basis.get("remote")
        np.testing.assert_allclose(r.marginal, golden_frame_marginal(None if b is None else b.vectors), atol=1e-12)
    assert report.max_tv == pytest.approx(FRAME_WITNESS, abs=1e-6)
    assert report.label == "frame (non-causal)"


def test_three_basis_frame_signal_is_small():
    sc = with_detector(golden_scenario())
    three = [
        Variation("Z", {"remote": Z}),
        Variation("X", {"remote": X}),
        Variation("absent", remove=("remote",)),
    ]
    report = signalling_scan(sc, CouplingSpec(), FRAME, "detector", three)
    assert report.max_tv == pytest.approx(0.0201568813519, abs=1e-9)


def test_local_mode_does_not_signal():
    sc = with_detector(golden_scenario())
    report = signalling_scan(sc, CouplingSpec(), LOCAL, "detector", remote_variations())
    assert report.max_tv < 1e-12
    assert report.label == "local"


def test_zero_coupling_frame_does_not_signal():
    sc = with_detector(golden_scenario())
    report = signalling_scan(sc, CouplingSpec(g=0.0), FRAME, "detector", remote_variations())
    assert report.max_tv < 1e-10


def test_out_of_cone_event_does_not_change_local_coupling_states():
    base = with_detector(golden_scenario(), time=13.5)
    other = base.with_events([replace(e, basis=X) if e.event_id == "remote" else e for e in base.events])
    runs = [evolve_nonlinear(s, CouplingSpec(), LOCAL, horizon=13.5) for s in (base, other)]
    for a, b in zip(runs[0].branches, runs[1].branches):
        ea = np.array([r[EARTH] for r in a.coupling_states[:1300]])
        eb = np.array([r[EARTH] for r in b.coupling_states[:1300]])
        np.testing.assert_allclose(ea, eb, atol=1e-12)


def test_dt_refinement_frame_marginal():
    sc = with_detector(golden_scenario()).released()
    coarse = marginal(evolve_nonlinear(sc, CouplingSpec(), FRAME, dt=0.01), "detector")
    fine = marginal(evolve_nonlinear(sc, CouplingSpec(), FRAME, dt=0.005), "detector")
    assert np.max(np.abs(coarse - fine)) < 0.05


def test_events_too_close_for_grid():
    parts = (Particle(0, (0.0,)), Particle(1, (1.0,)))
    events = (MeasurementEvent("a", 0, 1.0, Z), MeasurementEvent("b", 1, 1.015, Z))
    sc = Scenario(1, parts, StateVector((2, 2), [0, 1, 0, 0]), events)
    with pytest.raises(EventSnappingError):
        evolve_nonlinear(sc, CouplingSpec(), LOCAL, dt=0.01)
    evolve_nonlinear(sc, CouplingSpec(), LOCAL, dt=0.005)


def test_grid_times():
    dist = evolve_nonlinear(golden_scenario(), CouplingSpec(), LOCAL, dt=0.01)
    assert dist.n_steps == 1200
    assert dist.grid_time(1200) == pytest.approx(12.0)
    assert dist.mode is LOCAL


def test_invalid_dt():
    with pytest.raises(ValueError):
        evolve_nonlinear(golden_scenario(), CouplingSpec(), LOCAL, dt=0.0)


def test_density_matrix_input_accepted():
    rho = DensityMatrix((2,), np.diag([0.25, 0.75]))
    np.testing.assert_allclose(coupling_field(rho, CouplingSpec(g=1.0)), 0.25 * SZ)
