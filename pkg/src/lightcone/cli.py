"""Command-line front end.

Exit codes: 0 ok, 1 input error, 2 physics error (impossible outcome),
3 signalling detected by ``verify-nosignal``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .emulator import check_equivalence, run_network
from .errors import BranchLimitExceeded, EventSnappingError, PreconditionError, QueryError, ScenarioError, ZeroProbabilityBranch
from .fileformat import (
    NonlinearSettings,
    digest,
    dumps,
    load_scenario,
    load_variations,
    scenario_to_dict,
    variations_to_dict,
)
from .golden import DETECTOR, detector_event, golden_scenario, remote_variations
from .localstate import LocalStateQuery, frame_reduced_state, local_state, no_signalling_report
from .nonlinear import DEFAULT_DT, CouplingMode, CouplingSpec, signalling_scan
from .scenario import ensure_valid, frame_global_state, processing_order, sample_run

EXIT_OK, EXIT_INPUT, EXIT_PHYSICS, EXIT_SIGNAL = 0, 1, 2, 3


# report rendering


def _clean(x: float) -> float:
    return round(float(x), 12) + 0.0


def _jsonable(value):
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
        return [_jsonable(v) for v in value] if value.ndim else _clean(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float):
        return _clean(value)
    return value


def _fmt_scalar(z) -> str:
    if isinstance(z, (complex, np.complexfloating)):
        return f"{_clean(z.real):+.12f}{_clean(z.imag):+.12f}j"
    if isinstance(z, (float, np.floating)):
        return f"{_clean(z):.12g}"
    return str(z)


def _text_lines(value, indent: int) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, v in value.items():
        if isinstance(v, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_text_lines(v, indent + 1))
        elif isinstance(v, np.ndarray) and v.ndim == 2:
            lines.append(f"{pad}{key}:")
            for row in v:
                lines.append(f"{pad}  [" + ", ".join(_fmt_scalar(z) for z in row) + "]")
        elif isinstance(v, (list, tuple, np.ndarray)) and all(not isinstance(x, dict) for x in v):
            lines.append(f"{pad}{key}: [" + ", ".join(_fmt_scalar(z) for z in v) + "]")
        elif isinstance(v, (list, tuple)):
            lines.append(f"{pad}{key}:")
            for k, item in enumerate(v):
                lines.append(f"{pad}  - [{k}]")
                lines.extend(_text_lines(item, indent + 2))
        else:
            lines.append(f"{pad}{key}: {_fmt_scalar(v)}")
    return lines


def render(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2) + "\n"
    return "\n".join(_text_lines(report, 0)) + "\n"


def _report(command: str, scenario, results: dict[str, Any], **extra) -> dict[str, Any]:
    out: dict[str, Any] = {"command": command, "tool_version": __version__}
    if scenario is not None:
        out["scenario_digest"] = digest(scenario)
    out.update(extra)
    out["results"] = results
    return out


def _load(path: str):
    scenario, nonlinear = load_scenario(path)
    ensure_valid(scenario)
    return scenario, nonlinear


# commands


def cmd_run(args) -> tuple[dict, int]:
    scenario, _ = _load(args.scenario)
    run = sample_run(scenario, args.seed)
    final = frame_global_state(scenario, run, math.inf)
    results = {
        "outcomes": {e.event_id: run.outcomes[e.event_id] for e in processing_order(scenario.events)},
        "final_state": {"dims": list(final.dims), "amplitudes": final.amplitudes},
    }
    return _report("run", scenario, results, seed=args.seed), EXIT_OK


def cmd_local_state(args) -> tuple[dict, int]:
    scenario, _ = _load(args.scenario)
    run = sample_run(scenario, args.seed)
    rows = []
    for t in args.times:
        q = LocalStateQuery(args.particle, t)
        rows.append(
            {
                "time": t,
                "local_state": local_state(scenario, run, q).entries,
                "frame_state": frame_reduced_state(scenario, run, q).entries,
            }
        )
    results = {"particle": args.particle, "outcomes": dict(sorted(run.outcomes.items())), "states": rows}
    return _report("local-state", scenario, results, seed=args.seed), EXIT_OK


def _nonlinear_settings(args, from_file: NonlinearSettings | None) -> NonlinearSettings | None:
    if args.linear:
        return None
    if from_file is None and args.mode is None:
        return None
    base = from_file or NonlinearSettings(CouplingSpec(), CouplingMode.LOCAL, DEFAULT_DT)
    spec = base.spec if args.g is None else CouplingSpec(base.spec.kind, args.g, base.spec.reference, base.spec.custom)
    mode = base.mode if args.mode is None else CouplingMode(args.mode)
    dt = base.dt if args.dt is None else args.dt
    return NonlinearSettings(spec, mode, dt)


def cmd_verify_nosignal(args) -> tuple[dict, int]:
    scenario, from_file = _load(args.scenario)
    detector, additions, variations = load_variations(args.variations)
    detector = args.detector or detector
    if detector is None:
        raise PreconditionError("no detector event given (use --detector or the variations file)")
    scenario = scenario.with_events(scenario.events + tuple(additions))
    ensure_valid(scenario)
    try:
        scenario.event(detector)
    except KeyError:
        raise PreconditionError(f"detector event {detector!r} not in scenario") from None
    settings = _nonlinear_settings(args, from_file)
    if settings is None:
        report = no_signalling_report(scenario, detector, variations)
        extra = {"mode": "linear"}
    else:
        report = signalling_scan(scenario, settings.spec, settings.mode, detector, variations, settings.dt)
        extra = {
            "mode": report.label,
            "coupling": {"kind": settings.spec.kind, "g": settings.spec.g, "reference": settings.spec.reference},
            "dt": settings.dt,
        }
    signalling = report.max_tv >= args.threshold
    results = {
        "detector": detector,
        "baseline_marginal": report.baseline,
        "variations": [
            {"description": r.description, "marginal": r.marginal, "tv": r.tv} for r in report.results
        ],
        "max_tv": report.max_tv,
        "threshold": args.threshold,
        "verdict": "signalling detected" if signalling else "no signalling",
    }
    return _report("verify-nosignal", scenario, results, **extra), (EXIT_SIGNAL if signalling else EXIT_OK)


def cmd_emulate(args) -> tuple[dict, int]:
    scenario, _ = _load(args.scenario)
    run = sample_run(scenario, args.seed)
    timelines = run_network(scenario, run)
    if args.times:
        times = list(args.times)
    else:
        revs = sorted({t for tl in timelines for t in tl.times})
        times = revs + [(a + b) / 2 for a, b in zip(revs, revs[1:])] + [revs[-1] + 1.0]
        times.sort()
    results = {
        "outcomes": dict(sorted(run.outcomes.items())),
        "timelines": [
            {
                "node": tl.node,
                "revisions": [{"time": t, "state": rho.entries} for t, rho in tl.revisions],
            }
            for tl in timelines
        ],
        "sample_times": times,
        "max_trace_distance": check_equivalence(scenario, run, times),
    }
    return _report("emulate", scenario, results, seed=args.seed), EXIT_OK


def cmd_golden(args) -> tuple[str, int]:
    scenario = golden_scenario(complex(args.c), complex(args.d))
    text = dumps(scenario_to_dict(scenario))
    if args.variations_output:
        doc = variations_to_dict(DETECTOR, [detector_event()], remote_variations(complex(args.c), complex(args.d)))
        Path(args.variations_output).write_text(dumps(doc), encoding="utf-8")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return "", EXIT_OK
    return text, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=0, help="RNG seed for sampled outcomes")

    p = argparse.ArgumentParser(prog="lightcone", description="Light-cone local states of entangled particles.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common, seeded], help="sample one run and print the final state")
    r.add_argument("scenario")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("local-state", parents=[common, seeded], help="local vs frame reduced state")
    ls.add_argument("scenario")
    ls.add_argument("--particle", type=int, required=True)
    ls.add_argument("--times", type=float, nargs="+", required=True)
    ls.set_defaults(func=cmd_local_state)

    v = sub.add_parser("verify-nosignal", parents=[common], help="exact no-signalling check")
    v.add_argument("scenario")
    v.add_argument("--variations", required=True, help="variations JSON file")
    v.add_argument("--detector", help="detector event id (overrides the variations file)")
    v.add_argument("--threshold", type=float, default=1e-9)
    v.add_argument("--mode", choices=("local", "frame"), help="enable nonlinear evolution in this mode")
    v.add_argument("--g", type=float, help="z-field coupling strength (default pi/4)")
    v.add_argument("--dt", type=float, help=f"time step in hours (default {DEFAULT_DT})")
    v.add_argument("--linear", action="store_true", help="ignore any nonlinear settings in the file")
    v.set_defaults(func=cmd_verify_nosignal)

    e = sub.add_parser("emulate", parents=[common, seeded], help="light-speed broadcast emulator")
    e.add_argument("scenario")
    e.add_argument("--times", type=float, nargs="+")
    e.set_defaults(func=cmd_emulate)

    g = sub.add_parser("golden", help="write the built-in Earth/Callisto scenario")
    g.add_argument("-o", "--output")
    g.add_argument("--c", default="0.6", help="first basis coefficient (real, positive)")
    g.add_argument("--d", default="0.8", help="second basis coefficient (complex allowed, e.g. 0.8j)")
    g.add_argument("--variations-output", help="also write the standard Callisto variations file")
    g.set_defaults(func=cmd_golden)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        out, code = args.func(args)
    except ZeroProbabilityBranch as exc:
        print(f"physics error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PreconditionError, QueryError, EventSnappingError, BranchLimitExceeded, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if isinstance(out, dict):
        out = render(out, getattr(args, "format", "text"))
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
