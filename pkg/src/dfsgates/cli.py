"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 validation or physics failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import certify as certify_mod
from .exceptions import DfsGatesError
from .gates import (
    TWO_PI,
    Envelope,
    GateKind,
    ProtocolSpec,
    phase_report,
    run_protocol,
)
from .lindblad import (
    DEFAULT_STEPS,
    Collapse,
    IntegrationStats,
    NoiseSpec,
    bare_qubit_dephasing,
    control_error_sweep,
    default_input_state,
    open_gate_fidelity,
    ordered_map,
    rate_sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2
GATE_FIDELITY_TOL = 1e-10
OPEN_FIDELITY_TOL = 1e-6

SWEEP_COLUMNS = (
    "angle",
    "gamma",
    "total_phase",
    "dynamical_phase",
    "geometric_phase",
    "ratio",
    "target_fidelity",
    "max_leakage",
    "entangling",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{x:.12g}"
    return str(x)


def _num(x):
    return None if x is None else float(f"{x:.12g}")


def _add_protocol_args(p: argparse.ArgumentParser, with_angle: bool = True) -> None:
    if with_angle:
        p.add_argument("--theta", type=float, help="mixing angle for the Z gate (radians)")
        p.add_argument("--phi", type=float, help="mixing angle for the X and ZZ gates (radians)")
    p.add_argument("--envelope", choices=[e.value for e in Envelope], default="const")
    p.add_argument("--pulse-area", type=float, default=TWO_PI)
    p.add_argument("--segments", type=int, default=2000)
    p.add_argument("--out", type=Path, help="write output to this file instead of stdout")


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rate", type=float, default=0.0, help="dephasing rate in units of J")
    p.add_argument("--noise", choices=[c.value for c in Collapse], default="collective")
    p.add_argument("--rk-steps", type=int, default=DEFAULT_STEPS, help="RK4 steps per pulse")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dfsgates", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gate", help="run one gate protocol and print its report")
    p.add_argument("kind", choices=[k.value for k in GateKind])
    _add_protocol_args(p)
    p.add_argument("--format", choices=["json"], default="json")

    p = sub.add_parser("phases", help="total, dynamical and geometric phases")
    p.add_argument("--gate", choices=[k.value for k in GateKind], default="z")
    _add_protocol_args(p)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("sweep", help="grid sweeps over angle, pulse-area error or noise rate")
    p.add_argument("--gate", choices=[k.value for k in GateKind], default="z")
    p.add_argument("--over", choices=["angle", "epsilon", "rate"], default="angle")
    for name in ("theta", "phi", "epsilon", "rate"):
        p.add_argument(f"--{name}-min", type=float)
        p.add_argument(f"--{name}-max", type=float)
    p.add_argument("--steps", type=int, default=21, help="number of grid points")
    p.add_argument("--column", action="append", choices=SWEEP_COLUMNS[1:], help="restrict angle-sweep columns")
    p.add_argument("--theta", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--noise", choices=[c.value for c in Collapse], default="collective")
    p.add_argument("--rk-steps", type=int, default=DEFAULT_STEPS)
    p.add_argument("--workers", type=int, default=1)
    _add_protocol_args(p, with_angle=False)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("lindblad", help="gate fidelity under Markovian dephasing")
    p.add_argument("--gate", choices=[k.value for k in GateKind], default="z")
    p.add_argument("--bare", action="store_true", help="unencoded single-qubit contrast run")
    _add_protocol_args(p)
    _add_noise_args(p)
    p.add_argument("--format", choices=["json"], default="json")

    p = sub.add_parser("certify", help="run the full invariant suite")
    p.add_argument("--grid", type=int, default=21, help="angle grid points")
    p.add_argument("--corrupt-sign", action="store_true", help="flip the qubit-3 local field (bug injection)")
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["text", "json"], default="text")
    return parser


def _angle(args, kind: GateKind) -> float:
    wanted, other = ("theta", "phi") if kind is GateKind.Z else ("phi", "theta")
    if getattr(args, other, None) is not None:
        raise UsageError(f"gate {kind.value} takes --{wanted}, not --{other}")
    value = getattr(args, wanted)
    return 0.0 if value is None else value


def _spec(args, kind: GateKind, angle: float) -> ProtocolSpec:
    try:
        return ProtocolSpec(kind, angle, Envelope(args.envelope), args.pulse_area, args.segments)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])
    return buf.getvalue()


def cmd_gate(args) -> int:
    kind = GateKind(args.kind)
    report = run_protocol(_spec(args, kind, _angle(args, kind)))
    _emit(report.to_json(), args.out)
    return EXIT_OK if report.target_fidelity >= 1.0 - GATE_FIDELITY_TOL else EXIT_FAILURE


def cmd_phases(args) -> int:
    kind = GateKind(args.gate)
    reports = phase_report(_spec(args, kind, _angle(args, kind)))
    _emit(_table([r.to_dict() for r in reports], args.format), args.out)
    return EXIT_OK


def _grid(lo, hi, steps: int, name: str) -> list[float]:
    if lo is None or hi is None:
        raise UsageError(f"sweep needs --{name}-min and --{name}-max")
    if steps < 1:
        raise UsageError("--steps must be at least 1")
    if steps == 1:
        if lo != hi:
            raise UsageError("a single-step grid needs min == max")
        return [float(lo)]
    if hi < lo:
        raise UsageError(f"--{name}-max must not be below --{name}-min")
    return [float(x) for x in np.linspace(lo, hi, steps)]


def _angle_row(spec: ProtocolSpec) -> dict:
    report = run_protocol(spec)
    p = report.primary_phase
    return {
        "angle": _num(spec.angle),
        "gamma": _num(spec.expected_phase),
        "total_phase": _num(p.total_phase),
        "dynamical_phase": _num(p.dynamical_phase),
        "geometric_phase": _num(p.geometric_phase),
        "ratio": _num(p.ratio),
        "target_fidelity": _num(report.target_fidelity),
        "max_leakage": _num(report.leakage.max_leakage),
        "entangling": report.entangling,
    }


def cmd_sweep(args) -> int:
    kind = GateKind(args.gate)
    if args.over == "angle":
        name = "theta" if kind is GateKind.Z else "phi"
        grid = _grid(getattr(args, f"{name}_min"), getattr(args, f"{name}_max"), args.steps, name)
        specs = [_spec(args, kind, a) for a in grid]
        rows = ordered_map(_angle_row, specs, args.workers)
        if args.column:
            keep = ["angle", *args.column]
            rows = [{k: row[k] for k in keep} for row in rows]
    elif args.over == "epsilon":
        grid = _grid(args.epsilon_min, args.epsilon_max, args.steps, "epsilon")
        spec = _spec(args, kind, _angle(args, kind))
        rows = [
            {"epsilon": _num(eps), "fidelity": _num(f)}
            for eps, f in control_error_sweep(spec, grid, workers=args.workers)
        ]
    else:
        grid = _grid(args.rate_min, args.rate_max, args.steps, "rate")
        if grid[0] < 0:
            raise UsageError("rates must be non-negative")
        spec = _spec(args, kind, _angle(args, kind))
        rows = [
            {"rate": _num(r), "fidelity": _num(f)}
            for r, f in rate_sweep(spec, Collapse(args.noise), grid, steps=args.rk_steps, workers=args.workers)
        ]
    _emit(_table(rows, args.format), args.out)
    return EXIT_OK


def cmd_lindblad(args) -> int:
    if args.rate < 0:
        raise UsageError("--rate must be non-negative")
    stats = IntegrationStats()
    if args.bare:
        simulated, closed = bare_qubit_dephasing(args.rate, args.pulse_area, TWO_PI, args.rk_steps, stats)
        payload = {
            "mode": "bare",
            "rate": _num(args.rate),
            "noise": "independent",
            "fidelity": _num(simulated),
            "closed_form": _num(closed),
        }
        ok = True
    else:
        kind = GateKind(args.gate)
        spec = _spec(args, kind, _angle(args, kind))
        noise = NoiseSpec(args.rate, Collapse(args.noise))
        fidelity = open_gate_fidelity(spec, noise, default_input_state(spec), args.rk_steps, stats)
        payload = {
            "mode": "encoded",
            "kind": kind.value,
            "angle": _num(spec.angle),
            "envelope": spec.envelope.value,
            "pulse_area": _num(spec.pulse_area),
            "rate": _num(args.rate),
            "noise": noise.collapse.value,
            "fidelity": _num(fidelity),
        }
        # Only collective noise is expected to leave the encoded gate untouched.
        ok = noise.collapse is Collapse.INDEPENDENT or fidelity >= 1.0 - OPEN_FIDELITY_TOL
    payload.update(
        {
            "rk_steps": stats.steps,
            "max_trace_error": _num(stats.max_trace_error),
            "max_hermiticity_error": _num(stats.max_hermiticity_error),
            "min_eigenvalue": _num(stats.min_eigenvalue),
        }
    )
    _emit(json.dumps(payload, indent=2), args.out)
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_certify(args) -> int:
    if args.grid < 1:
        raise UsageError("--grid must be at least 1")
    config_fn = certify_mod.corrupt_sign_config if args.corrupt_sign else None
    results = certify_mod.run_checks(args.grid, config_fn)
    passed = all(r.passed for r in results)
    if args.format == "json":
        text = json.dumps({"passed": passed, "checks": [r.to_dict() for r in results]}, indent=2)
    else:
        lines = [r.line() for r in results]
        lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
        text = "\n".join(lines)
    _emit(text, args.out)
    return EXIT_OK if passed else EXIT_FAILURE


COMMANDS = {
    "gate": cmd_gate,
    "phases": cmd_phases,
    "sweep": cmd_sweep,
    "lindblad": cmd_lindblad,
    "certify": cmd_certify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dfsgates: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DfsGatesError as exc:
        print(f"dfsgates: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
