"""JSON scenario and variation files.

Scenario document::

    {
      "spatial_dim": 1,
      "start_time": 0.0,
      "particles": [{"id": 0, "position": [0.0], "dim": 2}, ...],
      "initial_state": {"kind": "named", "name": "singlet"}
                     | {"kind": "amplitudes", "re": [...], "im": [...]},
      "events": [{"event_id": "e1", "particle": 1, "time": 12.0,
                  "basis": [[[re, im], [re, im]], [[re, im], [re, im]]] | "Z" | "X" | "Y",
                  "outcome": "sampled" | 1}],
      "nonlinear": {"kind": "zfield", "g": 0.785, "reference": 0,
                    "mode": "local" | "frame", "dt": 0.01}          (optional)
    }

``basis`` lists one vector per outcome, each vector as ``[re, im]`` pairs.
Named states: ``singlet`` (two qubits), ``ghz``, ``w``, ``zero``, ``plus``.

Variation document::

    {
      "detector": "detector",
      "base_additions": [<event>, ...],
      "variations": [{"description": "...", "set_basis": {"e1": <basis>},
                      "remove": ["e2"], "add": [<event>, ...]}]
    }
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ScenarioError
from .localstate import Variation
from .nonlinear import DEFAULT_DT, CouplingMode, CouplingSpec
from .qlinalg import MeasurementBasis, StateVector, ghz, product_state, singlet, w_state
from .scenario import Issue, MeasurementEvent, Particle, Scenario

NAMED_BASES = {
    "Z": MeasurementBasis.computational,
    "X": MeasurementBasis.pauli_x,
    "Y": MeasurementBasis.pauli_y,
}


@dataclass(frozen=True)
class NonlinearSettings:
    spec: CouplingSpec
    mode: CouplingMode
    dt: float = DEFAULT_DT


def _fail(location: str, message: str, code: str = "malformed"):
    raise ScenarioError([Issue("error", code, message, location)])


def _num(value, location: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        _fail(location, f"expected a finite number, got {value!r}")
    return float(value)


def _int(value, location: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(location, f"expected an integer, got {value!r}")
    return value


def _get(obj: dict, key: str, location: str):
    if not isinstance(obj, dict):
        _fail(location, "expected an object")
    if key not in obj:
        _fail(f"{location}.{key}" if location else key, "missing field")
    return obj[key]


def named_state(name: str, dims: tuple[int, ...]) -> StateVector:
    n = len(dims)
    if any(d != 2 for d in dims):
        raise ValueError("named states are defined for qubits only")
    if name == "singlet":
        if n != 2:
            raise ValueError("the singlet needs exactly two particles")
        return singlet()
    if name == "ghz":
        return ghz(n)
    if name == "w":
        return w_state(n)
    if name == "zero":
        return product_state(*([[1, 0]] * n))
    if name == "plus":
        s = 1 / math.sqrt(2)
        return product_state(*([[s, s]] * n))
    raise ValueError(f"unknown named state {name!r}")


def parse_basis(raw, location: str) -> MeasurementBasis:
    if isinstance(raw, str):
        if raw not in NAMED_BASES:
            _fail(location, f"unknown basis name {raw!r}")
        return NAMED_BASES[raw]()
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        _fail(location, "basis must be a list of vectors of [re, im] pairs")
    if arr.ndim != 3 or arr.shape[2] != 2:
        _fail(location, "basis must be a list of vectors of [re, im] pairs")
    try:
        return MeasurementBasis(arr[..., 0] + 1j * arr[..., 1])
    except ValueError as exc:
        _fail(location, str(exc))


def parse_event(raw, location: str) -> MeasurementEvent:
    eid = _get(raw, "event_id", location)
    if not isinstance(eid, str) or not eid:
        _fail(f"{location}.event_id", "event_id must be a nonempty string")
    outcome = raw.get("outcome", "sampled")
    if outcome == "sampled":
        forced = None
    else:
        forced = _int(outcome, f"{location}.outcome")
    return MeasurementEvent(
        eid,
        _int(_get(raw, "particle", location), f"{location}.particle"),
        _num(_get(raw, "time", location), f"{location}.time"),
        parse_basis(_get(raw, "basis", location), f"{location}.basis"),
        forced,
    )


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    if not isinstance(doc, dict):
        _fail("", "scenario document must be a JSON object")
    spatial_dim = _int(_get(doc, "spatial_dim", ""), "spatial_dim")
    start = _num(doc.get("start_time", 0.0), "start_time")
    raw_particles = _get(doc, "particles", "")
    if not isinstance(raw_particles, list) or not raw_particles:
        _fail("particles", "expected a nonempty list")
    particles = []
    for i, rp in enumerate(raw_particles):
        loc = f"particles[{i}]"
        pos = _get(rp, "position", loc)
        if not isinstance(pos, list):
            _fail(f"{loc}.position", "expected a list of coordinates")
        particles.append(
            Particle(
                _int(_get(rp, "id", loc), f"{loc}.id"),
                tuple(_num(c, f"{loc}.position") for c in pos),
                _int(rp.get("dim", 2), f"{loc}.dim"),
            )
        )
    dims = tuple(p.dim for p in particles)

    raw_state = _get(doc, "initial_state", "")
    kind = _get(raw_state, "kind", "initial_state")
    try:
        if kind == "named":
            state = named_state(_get(raw_state, "name", "initial_state"), dims)
        elif kind == "amplitudes":
            re = np.asarray(_get(raw_state, "re", "initial_state"), dtype=float)
            im = np.asarray(raw_state.get("im", [0.0] * len(re)), dtype=float)
            if re.shape != im.shape:
                _fail("initial_state", "re and im differ in length", "dimension mismatch")
            state = StateVector(dims, re + 1j * im)
        else:
            _fail("initial_state.kind", f"unknown kind {kind!r}")
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        code = "dimension mismatch" if "length" in str(exc) or "dims" in str(exc) else "malformed"
        _fail("initial_state", str(exc), code)

    raw_events = doc.get("events", [])
    if not isinstance(raw_events, list):
        _fail("events", "expected a list")
    events = [parse_event(re_, f"events[{k}]") for k, re_ in enumerate(raw_events)]
    return Scenario(spatial_dim, tuple(particles), state, tuple(events), start)


def nonlinear_from_dict(doc: dict[str, Any]) -> NonlinearSettings | None:
    raw = doc.get("nonlinear")
    if raw is None:
        return None
    try:
        spec = CouplingSpec(
            kind=raw.get("kind", "zfield"),
            g=_num(raw.get("g", math.pi / 4), "nonlinear.g"),
            reference=_int(raw.get("reference", 0), "nonlinear.reference"),
            custom=raw.get("custom"),
        )
        mode = CouplingMode(raw.get("mode", "local"))
    except ValueError as exc:
        _fail("nonlinear", str(exc))
    dt = _num(raw.get("dt", DEFAULT_DT), "nonlinear.dt")
    if dt <= 0:
        _fail("nonlinear.dt", "dt must be positive")
    return NonlinearSettings(spec, mode, dt)


def read_json(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(f"{path}:{exc.lineno}:{exc.colno}", exc.msg, "json")


def load_scenario(path: str | Path) -> tuple[Scenario, NonlinearSettings | None]:
    doc = read_json(path)
    return scenario_from_dict(doc), nonlinear_from_dict(doc)


def load_variations(path: str | Path) -> tuple[str | None, list[MeasurementEvent], list[Variation]]:
    doc = read_json(path)
    detector = doc.get("detector")
    additions = [parse_event(e, f"base_additions[{k}]") for k, e in enumerate(doc.get("base_additions", []))]
    out = []
    for k, rv in enumerate(doc.get("variations", [])):
        loc = f"variations[{k}]"
        out.append(
            Variation(
                str(rv.get("description", f"variation {k}")),
                {eid: parse_basis(b, f"{loc}.set_basis.{eid}") for eid, b in rv.get("set_basis", {}).items()},
                tuple(rv.get("remove", [])),
                tuple(parse_event(e, f"{loc}.add[{j}]") for j, e in enumerate(rv.get("add", []))),
            )
        )
    return detector, additions, out


# serialization


def _f(x) -> float:
    return float(x) + 0.0  # folds -0.0 into 0.0


def basis_to_list(basis: MeasurementBasis) -> list:
    return [[[_f(z.real), _f(z.imag)] for z in vec] for vec in basis.vectors]


def event_to_dict(e: MeasurementEvent) -> dict[str, Any]:
    return {
        "event_id": e.event_id,
        "particle": e.particle,
        "time": _f(e.time),
        "basis": basis_to_list(e.basis),
        "outcome": "sampled" if e.forced_outcome is None else e.forced_outcome,
    }


def _state_to_dict(state: StateVector) -> dict[str, Any]:
    for name in ("singlet", "ghz", "w", "zero", "plus"):
        try:
            ref = named_state(name, state.dims)
        except ValueError:
            continue
        if np.array_equal(ref.amplitudes, state.amplitudes):
            return {"kind": "named", "name": name}
    return {
        "kind": "amplitudes",
        "re": [_f(z.real) for z in state.amplitudes],
        "im": [_f(z.imag) for z in state.amplitudes],
    }


def scenario_to_dict(scenario: Scenario, nonlinear: NonlinearSettings | None = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "spatial_dim": scenario.spatial_dim,
        "start_time": _f(scenario.start_time),
        "particles": [
            {"id": p.id, "position": [_f(c) for c in p.position], "dim": p.dim} for p in scenario.particles
        ],
        "initial_state": _state_to_dict(scenario.initial_state),
        "events": [event_to_dict(e) for e in scenario.events],
    }
    if nonlinear is not None:
        doc["nonlinear"] = {
            "kind": nonlinear.spec.kind,
            "g": nonlinear.spec.g,
            "reference": nonlinear.spec.reference,
            "mode": nonlinear.mode.value,
            "dt": nonlinear.dt,
        }
        if nonlinear.spec.custom is not None:
            doc["nonlinear"]["custom"] = nonlinear.spec.custom
    return doc


def variations_to_dict(detector: str, additions, variations) -> dict[str, Any]:
    return {
        "detector": detector,
        "base_additions": [event_to_dict(e) for e in additions],
        "variations": [
            {
                "description": v.description,
                "set_basis": {eid: basis_to_list(b) for eid, b in v.set_basis.items()},
                "remove": list(v.remove),
                "add": [event_to_dict(e) for e in v.add],
            }
            for v in variations
        ],
    }


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def digest(scenario: Scenario) -> str:
    canonical = json.dumps(scenario_to_dict(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
