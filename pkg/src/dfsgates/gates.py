"""Unconventional geometric gates in decoherence-free subspaces.

Each protocol drives a fixed XXZ coupling pattern with a common scalar
envelope ``J(t)``. Because every instantaneous Hamiltonian is a multiple
of the same matrix, the propagator depends on the envelope only through
its running area ``Lambda(t) = int_0^t J``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import simpson

from .encoding import (
    DEFAULT_LEAKAGE_SAMPLES,
    DfsEncoding,
    LeakageReport,
    leakage,
    project_to_dfs,
    standard_single_qubit_encoding,
    standard_two_qubit_encoding,
)
from .exceptions import (
    DegenerateGeometricPhase,
    LeakageExceeded,
    NotUnitary,
    StateNotCyclic,
)
from .hamiltonian import CouplingConfig, build_hamiltonian
from .operators import (
    operator_fidelity,
    propagator_from_spectrum,
    spectral_decomposition,
    unitarity_error,
)

TWO_PI = 2.0 * math.pi
DEFAULT_SEGMENTS = 2000
LEAKAGE_LIMIT = 1e-9
CYCLIC_TOL = 1e-9
DEGENERATE_TOL = 1e-9
LOCAL_INVARIANT_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)


class GateKind(str, enum.Enum):
    Z = "z"
    X = "x"
    ZZ = "zz"


class Envelope(str, enum.Enum):
    CONSTANT = "const"
    SIN_SQUARED = "sin2"

    def rate(self, t, area: float, duration: float):
        """Instantaneous envelope ``J(t)`` with total area ``area``."""
        t = np.asarray(t, dtype=float)
        if self is Envelope.CONSTANT:
            return np.full_like(t, area / duration)
        return 2.0 * area / duration * np.sin(math.pi * t / duration) ** 2

    def running_area(self, t, area: float, duration: float):
        """Closed-form ``int_0^t J(s) ds``."""
        t = np.asarray(t, dtype=float)
        if self is Envelope.CONSTANT:
            return area * t / duration
        return area / duration * (t - duration / TWO_PI * np.sin(TWO_PI * t / duration))


@dataclass(frozen=True)
class ProtocolSpec:
    """One gate protocol.

    ``angle`` is the coupling-mixing angle (theta for Z, phi for X and ZZ),
    restricted to ``[-pi/2, pi/2]``. ``duration`` is the pulse length in
    units of inverse coupling energy; only ``pulse_area`` fixes the gate.
    """

    kind: GateKind
    angle: float
    envelope: Envelope = Envelope.CONSTANT
    pulse_area: float = TWO_PI
    segments: int = DEFAULT_SEGMENTS
    duration: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "envelope", Envelope(self.envelope))
        if not -math.pi / 2 - 1e-12 <= self.angle <= math.pi / 2 + 1e-12:
            raise ValueError(f"angle {self.angle} outside [-pi/2, pi/2]")
        if self.segments < 2:
            raise ValueError("segments must be at least 2")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not math.isfinite(self.pulse_area):
            raise ValueError("pulse_area must be finite")

    @property
    def expected_phase(self) -> float:
        """Closed-form total phase ``2 pi sin(angle)`` for a 2 pi pulse."""
        return TWO_PI * math.sin(self.angle)


def protocol_config(spec: ProtocolSpec, envelope_value: float = 1.0) -> CouplingConfig:
    """Coupling pattern realising ``spec`` at envelope strength ``envelope_value``."""
    j = envelope_value
    c, s = math.cos(spec.angle), math.sin(spec.angle)
    if spec.kind is GateKind.Z:
        return CouplingConfig(3, jxy={(1, 3): j * c}, jz_local={3: -j * s})
    if spec.kind is GateKind.X:
        return CouplingConfig(
            3,
            jxy={(1, 2): j * c / _SQRT2, (1, 3): -j * c / _SQRT2, (2, 3): -j * s},
            jz_local={2: -j * s / 2, 3: -j * s / 2},
        )
    return CouplingConfig(6, jxy={(3, 5): j * c}, jzz={(3, 6): j * s})


def encoding_for(kind: GateKind) -> DfsEncoding:
    if GateKind(kind) is GateKind.ZZ:
        return standard_two_qubit_encoding()
    return standard_single_qubit_encoding()


def _dfs_vector(encoding: DfsEncoding, amplitudes: dict[str, complex]) -> np.ndarray:
    v = np.zeros(encoding.dim, dtype=complex)
    for label, amp in amplitudes.items():
        v[encoding.index(label)] = amp
    return v


def _decoupled_state(kind: GateKind, encoding: DfsEncoding) -> np.ndarray:
    if kind is GateKind.Z:
        return _dfs_vector(encoding, {"0_L": 1.0})
    if kind is GateKind.X:
        return _dfs_vector(encoding, {"0_L": 1 / _SQRT2, "1_L": 1 / _SQRT2})
    return _dfs_vector(encoding, {"01_L": 1.0})


def _cyclic_states(kind: GateKind, encoding: DfsEncoding) -> list[tuple[str, np.ndarray]]:
    if kind is GateKind.Z:
        return [("1_L", _dfs_vector(encoding, {"1_L": 1.0}))]
    if kind is GateKind.X:
        return [("-_L", _dfs_vector(encoding, {"0_L": 1 / _SQRT2, "1_L": -1 / _SQRT2}))]
    return [
        ("00_L", _dfs_vector(encoding, {"00_L": 1.0})),
        ("11_L", _dfs_vector(encoding, {"11_L": 1.0})),
    ]


def _computational_labels(kind: GateKind) -> list[str]:
    if kind is GateKind.ZZ:
        return ["00_L", "01_L", "10_L", "11_L"]
    return ["0_L", "1_L"]


def target_gate(kind: GateKind, gamma: float) -> np.ndarray:
    """Ideal logical gate for rotation phase ``gamma`` in the computational basis."""
    kind = GateKind(kind)
    phase = np.exp(-1j * gamma)
    if kind is GateKind.Z:
        return np.diag([1.0, phase]).astype(complex)
    if kind is GateKind.X:
        plus = np.array([1.0, 1.0]) / _SQRT2
        minus = np.array([1.0, -1.0]) / _SQRT2
        return (np.outer(plus, plus) + phase * np.outer(minus, minus)).astype(complex)
    return np.diag([phase, 1.0, 1.0, phase]).astype(complex)


def logical_basis_for_phase(spec: ProtocolSpec) -> list[tuple[str, np.ndarray]]:
    """Cyclic logical states whose phases certify the gate, as full-register vectors."""
    encoding = encoding_for(spec.kind)
    return [(label, encoding.embed(v)) for label, v in _cyclic_states(spec.kind, encoding)]


class ProtocolEvolution:
    """Closed-system evolution of one protocol on the full physical register.

    The time grid has ``spec.segments`` equal panels. The propagator over
    each panel is ``exp(-i H_unit dLambda)`` with the exact panel area, and
    since all panel generators commute the running product is evaluated
    from one eigendecomposition of ``H_unit``.
    """

    def __init__(self, spec: ProtocolSpec, config: CouplingConfig | None = None):
        self.spec = spec
        self.config = config if config is not None else protocol_config(spec, 1.0)
        self.encoding = encoding_for(spec.kind)
        if self.config.n_qubits != self.encoding.n_qubits:
            raise ValueError("config register does not match the protocol encoding")
        self.h_unit = build_hamiltonian(self.config)
        self._evals, self._evecs = spectral_decomposition(self.h_unit)
        self._iso = self.encoding.isometry()

        self.decoupled = _decoupled_state(spec.kind, self.encoding)
        h_dfs = project_to_dfs(self.h_unit, self.encoding)
        # Identity offset dropped from the logical Hamiltonian.
        self.offset = float(np.vdot(self.decoupled, h_dfs @ self.decoupled).real)
        self.h_logical_unit = h_dfs - self.offset * np.eye(self.encoding.dim)

        self.times = np.linspace(0.0, spec.duration, spec.segments + 1)
        self.areas = self.area_at(self.times)

    def area_at(self, t):
        return self.spec.envelope.running_area(t, self.spec.pulse_area, self.spec.duration)

    def envelope_at(self, t):
        return self.spec.envelope.rate(t, self.spec.pulse_area, self.spec.duration)

    def hamiltonian_at(self, t: float) -> np.ndarray:
        return float(self.envelope_at(t)) * self.h_unit

    def propagator(self, t: float) -> np.ndarray:
        return propagator_from_spectrum(self._evals, self._evecs, float(self.area_at(t)))

    def final_propagator(self) -> np.ndarray:
        return self.propagator(self.spec.duration)

    def dfs_propagator(self, t: float) -> np.ndarray:
        return self._iso.conj().T @ self.propagator(t) @ self._iso

    def trajectory(self, psi0_full: np.ndarray) -> np.ndarray:
        """States ``U(t_k)|psi0>`` on the grid, one column per time."""
        coeffs = self._evecs.conj().T @ psi0_full
        phases = np.exp(-1j * np.outer(self._evals, self.areas))
        return self._evecs @ (phases * coeffs[:, None])

    def normalized_logical(self) -> np.ndarray:
        """Final DFS-restricted propagator with the decoupled state's phase set to 1."""
        u_dfs = self.dfs_propagator(self.spec.duration)
        ref = np.vdot(self.decoupled, u_dfs @ self.decoupled)
        return u_dfs * (abs(ref) / ref)

    def logical_unitary(self) -> np.ndarray:
        idx = [self.encoding.index(label) for label in _computational_labels(self.spec.kind)]
        return self.normalized_logical()[np.ix_(idx, idx)]

    def leakage(self, sample_count: int = DEFAULT_LEAKAGE_SAMPLES) -> LeakageReport:
        return leakage(self.propagator, self.encoding, sample_count, self.spec.duration)

    def dynamical_phase(self, psi_full: np.ndarray) -> float:
        """``-int_0^tau <psi(t)|H_logical(t)|psi(t)> dt`` by composite Simpson.

        Raises:
            StateNotCyclic: if ``psi`` does not return to itself up to a phase.
        """
        psi_full = np.asarray(psi_full, dtype=complex)
        overlap = abs(np.vdot(psi_full, self.final_propagator() @ psi_full))
        if overlap < 1.0 - CYCLIC_TOL:
            raise StateNotCyclic(f"|<psi|U(tau)|psi>| = {overlap:.12f}")
        states = self._iso.conj().T @ self.trajectory(psi_full)
        energies = np.einsum("ik,ij,jk->k", states.conj(), self.h_logical_unit, states).real
        integrand = self.envelope_at(self.times) * energies
        return -float(simpson(integrand, x=self.times))

    def total_phase(self, psi_dfs: np.ndarray) -> float:
        """Phase ``gamma`` with ``U|psi> = exp(-i gamma)|psi>``, on the branch nearest the closed form."""
        amp = np.vdot(psi_dfs, self.normalized_logical() @ psi_dfs)
        raw = -float(np.angle(amp))
        target = self.spec.expected_phase
        return raw + TWO_PI * round((target - raw) / TWO_PI)

    def phase_reports(self, strict: bool = False) -> list["PhaseReport"]:
        reports = []
        for label, psi in _cyclic_states(self.spec.kind, self.encoding):
            total = self.total_phase(psi)
            dynamical = self.dynamical_phase(self.encoding.embed(psi))
            geometric = total - dynamical
            if abs(geometric) < DEGENERATE_TOL:
                if strict:
                    raise DegenerateGeometricPhase(f"geometric phase {geometric:.3e} on {label}")
                ratio = None
            else:
                ratio = dynamical / geometric
            reports.append(PhaseReport(label, total, dynamical, geometric, ratio))
        return reports


@dataclass(frozen=True)
class PhaseReport:
    state: str
    total_phase: float
    dynamical_phase: float
    geometric_phase: float
    ratio: float | None

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "total_phase": _round(self.total_phase),
            "dynamical_phase": _round(self.dynamical_phase),
            "geometric_phase": _round(self.geometric_phase),
            "ratio": _round(self.ratio),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseReport":
        return cls(
            data["state"],
            data["total_phase"],
            data["dynamical_phase"],
            data["geometric_phase"],
            data["ratio"],
        )


def _round(x):
    """Twelve significant digits, the precision of every emitted number."""
    if x is None:
        return None
    return float(f"{x:.12g}") + 0.0


@dataclass(frozen=True)
class GateReport:
    spec: ProtocolSpec
    logical_unitary: np.ndarray = field(compare=False)
    phases: tuple[PhaseReport, ...]
    leakage: LeakageReport = field(compare=False)
    target_fidelity: float
    entangling: bool | None = None

    @property
    def primary_phase(self) -> PhaseReport:
        return self.phases[0]

    def __eq__(self, other):
        if not isinstance(other, GateReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    def to_dict(self) -> dict:
        p = self.primary_phase
        return {
            "kind": self.spec.kind.value,
            "angle": _round(self.spec.angle),
            "pulse_area": _round(self.spec.pulse_area),
            "envelope": self.spec.envelope.value,
            "segments": self.spec.segments,
            "duration": _round(self.spec.duration),
            "total_phase": _round(p.total_phase),
            "dynamical_phase": _round(p.dynamical_phase),
            "geometric_phase": _round(p.geometric_phase),
            "ratio": _round(p.ratio),
            "cyclic_phases": [ph.to_dict() for ph in self.phases],
            "max_leakage": _round(self.leakage.max_leakage),
            "logical_unitary": [
                [_round(z.real), _round(z.imag)] for z in np.asarray(self.logical_unitary).ravel()
            ],
            "target_fidelity": _round(self.target_fidelity),
            "entangling": self.entangling,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "GateReport":
        spec = ProtocolSpec(
            kind=GateKind(data["kind"]),
            angle=data["angle"],
            envelope=Envelope(data["envelope"]),
            pulse_area=data["pulse_area"],
            segments=data.get("segments", DEFAULT_SEGMENTS),
            duration=data.get("duration", TWO_PI),
        )
        flat = np.array([complex(re, im) for re, im in data["logical_unitary"]])
        d = int(round(math.sqrt(flat.size)))
        phases = data.get("cyclic_phases") or [
            {k: data[k] for k in ("total_phase", "dynamical_phase", "geometric_phase", "ratio")}
            | {"state": ""}
        ]
        return cls(
            spec=spec,
            logical_unitary=flat.reshape(d, d),
            phases=tuple(PhaseReport.from_dict(ph) for ph in phases),
            leakage=LeakageReport(data["max_leakage"], ()),
            target_fidelity=data["target_fidelity"],
            entangling=data.get("entangling"),
        )

    @classmethod
    def from_json(cls, text: str) -> "GateReport":
        return cls.from_dict(json.loads(text))


def run_protocol(
    spec: ProtocolSpec,
    config: CouplingConfig | None = None,
    leakage_samples: int = DEFAULT_LEAKAGE_SAMPLES,
) -> GateReport:
    """Evolve the full register under ``spec`` and extract the logical gate.

    ``config`` overrides the unit-envelope coupling pattern; it exists so
    deliberately corrupted protocols can be pushed through the same
    analysis.

    Raises:
        LeakageExceeded: if any sampled propagator leaves the DFS by more
            than 1e-9.
    """
    evo = ProtocolEvolution(spec, config)
    leak = evo.leakage(leakage_samples)
    if leak.max_leakage > LEAKAGE_LIMIT:
        raise LeakageExceeded(f"max leakage {leak.max_leakage:.3e} exceeds {LEAKAGE_LIMIT:.0e}")
    logical = evo.logical_unitary()
    phases = evo.phase_reports(strict=False)
    fidelity = operator_fidelity(logical, target_gate(spec.kind, spec.expected_phase))
    entangling = is_entangling(logical) if spec.kind is GateKind.ZZ else None
    return GateReport(spec, logical, tuple(phases), leak, fidelity, entangling)


def dynamical_phase(spec: ProtocolSpec, state) -> float:
    return ProtocolEvolution(spec).dynamical_phase(np.asarray(state, dtype=complex))


def phase_report(spec: ProtocolSpec) -> list[PhaseReport]:
    """Total, dynamical and geometric phases for each cyclic state of ``spec``.

    Raises:
        DegenerateGeometricPhase: when the geometric phase vanishes, which
            happens only at ``sin(angle) = 0``.
    """
    return ProtocolEvolution(spec).phase_reports(strict=True)


MAGIC_BASIS = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / _SQRT2


def makhlin_invariants(u) -> tuple[complex, float]:
    """Local invariants ``(G1, G2)`` of a two-qubit unitary."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise NotUnitary(f"expected a 4x4 gate, got {u.shape}")
    if unitarity_error(u) > 1e-9:
        raise NotUnitary("gate is not unitary")
    ub = MAGIC_BASIS.conj().T @ u @ MAGIC_BASIS
    det = np.linalg.det(ub)
    m = ub.T @ ub
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(g2.real)


def is_entangling(u, tol: float = LOCAL_INVARIANT_TOL) -> bool:
    """True unless ``u`` is a product of single-qubit gates up to global phase.

    Local gates are exactly those with ``G1 = 1`` and ``G2 = 3``.
    """
    g1, g2 = makhlin_invariants(u)
    return not (abs(g1 - 1.0) <= tol and abs(g2 - 3.0) <= tol)


@dataclass(frozen=True)
class Composition:
    unitary: np.ndarray
    angle_parameters: tuple[float, ...]


def compose_single_qubit(
    rotations: Sequence[tuple[str, float]],
    envelope: Envelope = Envelope.CONSTANT,
) -> Composition:
    """Chain realised Z_L / X_L rotations, first element applied first.

    Each entry is ``(axis, gamma)`` with ``gamma`` in ``[-2 pi, 2 pi]``;
    the protocol angle used is ``arcsin(gamma / 2 pi)``.
    """
    total = np.eye(2, dtype=complex)
    params = []
    for axis, gamma in rotations:
        kind = {"z": GateKind.Z, "z_l": GateKind.Z, "x": GateKind.X, "x_l": GateKind.X}[axis.lower()]
        angle = math.asin(max(-1.0, min(1.0, gamma / TWO_PI)))
        params.append(angle)
        gate = ProtocolEvolution(ProtocolSpec(kind, angle, envelope)).logical_unitary()
        total = gate @ total
    return Composition(total, tuple(params))
