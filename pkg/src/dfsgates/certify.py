"""Invariant suite behind ``dfsgates certify``."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .encoding import standard_single_qubit_encoding, standard_two_qubit_encoding, verify_dfs
from .exceptions import DfsGatesError
from .gates import (
    TWO_PI,
    Envelope,
    GateKind,
    ProtocolEvolution,
    ProtocolSpec,
    compose_single_qubit,
    is_entangling,
    protocol_config,
    target_gate,
)
from .hamiltonian import CouplingConfig, build_hamiltonian, collective_dephasing_operator
from .operators import commutator, operator_fidelity

ConfigFn = Callable[[ProtocolSpec], CouplingConfig]

PHASE_TOL = 1e-9
DYNAMICAL_TOL = 1e-8
RATIO_TOL = 1e-8
RATIO_MIN_SIN = 0.05
GATE_TOL = 1e-10
LEAKAGE_TOL = 1e-12
COMMUTATION_TOL = 1e-13
DEGENERACY_TOL = 1e-10
STATIONARY_TOL = 1e-10
NONCOMMUTE_MIN = 0.5
HADAMARD_TOL = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        text = f"[{flag}] {self.name}: worst={self.worst:.12g} tol={self.tolerance:.3g}"
        return f"{text} ({self.detail})" if self.detail else text

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst": float(f"{self.worst:.12g}"),
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def corrupt_sign_config(spec: ProtocolSpec) -> CouplingConfig:
    """Protocol config with the local field on qubit 3 sign-flipped (injected bug)."""
    config = protocol_config(spec, 1.0)
    if 3 not in config.jz_local:
        return config
    jz = dict(config.jz_local)
    jz[3] = -jz[3]
    return CouplingConfig(config.n_qubits, dict(config.jxy), dict(config.jzz), jz)


def angle_grid(points: int) -> np.ndarray:
    if points == 1:
        return np.array([0.0])
    return np.linspace(-math.pi / 2, math.pi / 2, points)


def _evolutions(grid, config_fn: ConfigFn, envelope=Envelope.CONSTANT):
    for kind in GateKind:
        for angle in grid:
            spec = ProtocolSpec(kind, float(angle), envelope)
            yield spec, ProtocolEvolution(spec, config_fn(spec))


def _worst(name: str, values, tol: float, detail: str = "", lower_is_better: bool = True) -> CheckResult:
    worst = max(values) if values else 0.0
    passed = worst <= tol if lower_is_better else worst >= tol
    return CheckResult(name, bool(passed), float(worst), tol, detail)


def check_dfs() -> CheckResult:
    try:
        e1 = verify_dfs(standard_single_qubit_encoding())
        e2 = verify_dfs(standard_two_qubit_encoding())
    except DfsGatesError as exc:
        return CheckResult("dfs_verification", False, math.inf, 0.0, str(exc))
    dev = max(abs(e1 - 1.0), abs(e2 - 2.0))
    return CheckResult("dfs_verification", dev == 0.0, dev, 0.0, f"eigenvalues {e1:g}, {e2:g}")


def run_checks(points: int = 21, config_fn: ConfigFn | None = None) -> list[CheckResult]:
    """Every certification check on an ``points``-angle grid in [-pi/2, pi/2]."""
    config_fn = config_fn or (lambda spec: protocol_config(spec, 1.0))
    grid = angle_grid(points)
    results = [check_dfs()]

    commute, phase_err, dyn_err, ratio_err, gate_err, leak, degeneracy, stationary = ([] for _ in range(8))
    failures: list[str] = []
    for spec, evo in _evolutions(grid, config_fn):
        n = evo.config.n_qubits
        commute.append(float(np.max(np.abs(commutator(build_hamiltonian(evo.config), collective_dephasing_operator(n))))))
        s = math.sin(spec.angle)
        try:
            reports = evo.phase_reports(strict=False)
        except DfsGatesError as exc:
            failures.append(f"{spec.kind.value}@{spec.angle:.4g}: {type(exc).__name__}")
            phase_err.append(math.inf)
            dyn_err.append(math.inf)
            ratio_err.append(math.inf)
            reports = []
        for rep in reports:
            phase_err.append(abs(rep.total_phase - TWO_PI * s))
            dyn_err.append(abs(rep.dynamical_phase + 2 * TWO_PI * s))
            if abs(s) >= RATIO_MIN_SIN:
                ratio_err.append(math.inf if rep.ratio is None else abs(rep.ratio + 2.0 / 3.0))
        if spec.kind is GateKind.ZZ and reports:
            degeneracy.append(abs(reports[0].total_phase - reports[1].total_phase))
            degeneracy.append(abs(reports[0].dynamical_phase - reports[1].dynamical_phase))
        gate_err.append(1.0 - operator_fidelity(evo.logical_unitary(), target_gate(spec.kind, TWO_PI * s)))
        leak.append(evo.leakage().max_leakage)
        stationary.extend(_stationarity(evo))

    results += [
        _worst("hamiltonian_commutes_with_collective_dephasing", commute, COMMUTATION_TOL),
        _worst("total_phase_equals_2pi_sin", phase_err, PHASE_TOL, _summary(failures)),
        _worst("dynamical_phase_equals_minus_4pi_sin", dyn_err, DYNAMICAL_TOL),
        _worst("ratio_constant_minus_two_thirds", ratio_err, RATIO_TOL, f"|sin(angle)| >= {RATIO_MIN_SIN}"),
        _worst("gate_matrix_infidelity", gate_err, GATE_TOL),
        _worst("leakage", leak, LEAKAGE_TOL, "201 samples per protocol"),
        _worst("zz_cyclic_phase_degeneracy", degeneracy, DEGENERACY_TOL),
        _worst("decoupled_state_stationarity", stationary, STATIONARY_TOL),
        check_envelope_invariance(grid, config_fn),
        check_noncommutation(),
        check_hadamard_composition(),
        check_entangling_classification(),
    ]
    return results


def _summary(failures: list[str]) -> str:
    if not failures:
        return ""
    more = f" and {len(failures) - 3} more" if len(failures) > 3 else ""
    return "phase extraction failed: " + ", ".join(failures[:3]) + more


def _stationarity(evo: ProtocolEvolution) -> list[float]:
    kind = evo.spec.kind
    if kind is GateKind.ZZ:
        states = [evo.encoding.full_vector("01_L"), evo.encoding.full_vector("10_L")]
    else:
        states = [evo.encoding.embed(evo.decoupled)]
    errs = []
    for psi in states:
        amps = np.einsum("i,ik->k", psi.conj(), evo.trajectory(psi))
        errs.append(float(np.max(np.abs(np.abs(amps) - 1.0))))
    return errs


def check_envelope_invariance(grid, config_fn: ConfigFn) -> CheckResult:
    errs = []
    for spec, evo in _evolutions(grid, config_fn):
        other = ProtocolEvolution(replace(spec, envelope=Envelope.SIN_SQUARED), config_fn(spec))
        errs.append(1.0 - operator_fidelity(evo.logical_unitary(), other.logical_unitary()))
    return _worst("envelope_invariance_infidelity", errs, GATE_TOL, "const vs sin2, area 2pi")


def check_noncommutation() -> CheckResult:
    uz = compose_single_qubit([("z", math.pi / 2)]).unitary
    ux = compose_single_qubit([("x", math.pi / 2)]).unitary
    norm = float(np.max(np.abs(commutator(uz, ux))))
    return CheckResult("z_x_noncommutation", norm > NONCOMMUTE_MIN, norm, NONCOMMUTE_MIN, "max-norm of [U_Z, U_X], must exceed")


def check_hadamard_composition() -> CheckResult:
    seq = [("z", math.pi / 2), ("x", math.pi / 2), ("z", math.pi / 2)]
    u = compose_single_qubit(seq).unitary
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    err = 1.0 - operator_fidelity(u, hadamard)
    return CheckResult("hadamard_composition_infidelity", err <= HADAMARD_TOL, err, HADAMARD_TOL)


def entangling_grid() -> list[float]:
    """Sixteen gamma_3 values k*pi/8, k = -7..8; includes 0 and pi exactly."""
    return [k * math.pi / 8 for k in range(-7, 9)]


def check_entangling_classification() -> CheckResult:
    wrong = []
    for gamma in entangling_grid():
        spec = ProtocolSpec(GateKind.ZZ, math.asin(gamma / TWO_PI))
        got = is_entangling(ProtocolEvolution(spec).logical_unitary())
        expected = not any(math.isclose(gamma, v, abs_tol=1e-12) for v in (0.0, math.pi, -math.pi))
        if got != expected:
            wrong.append(gamma)
    detail = "16 gamma_3 points" + (f"; misclassified {wrong}" if wrong else "")
    return CheckResult("entangling_classification", not wrong, float(len(wrong)), 0.0, detail)
