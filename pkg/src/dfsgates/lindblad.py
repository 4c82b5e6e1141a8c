"""Markovian dephasing dynamics for DFS-encoded gates.

The environment operator coupling to ``sum_k Z_k`` is replaced by a
Lindblad dephasing channel with an adjustable rate. Integration is fixed
step classic RK4.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .exceptions import StateInvalid, StepTooLarge
from .gates import Envelope, ProtocolEvolution, ProtocolSpec, TWO_PI
from .hamiltonian import PauliAxis, collective_dephasing_operator, pauli_on_site
from .operators import check_hermitian, operator_fidelity

DEFAULT_STEPS = 5000
STABILITY_LIMIT = 0.05
TRACE_STEP_BUDGET = 1e-9
STATE_HERMITIAN_TOL = 1e-10
STATE_TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8
_POSITIVITY_CHECK_EVERY = 250


class Collapse(str, enum.Enum):
    COLLECTIVE = "collective"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class NoiseSpec:
    rate: float = 0.0
    collapse: Collapse = Collapse.COLLECTIVE

    def __post_init__(self):
        object.__setattr__(self, "collapse", Collapse(self.collapse))
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValueError(f"rate must be finite and non-negative, got {self.rate}")

    def collapse_operators(self, n_qubits: int) -> list[np.ndarray]:
        if self.collapse is Collapse.COLLECTIVE:
            return [collective_dephasing_operator(n_qubits)]
        return [pauli_on_site(PauliAxis.Z, k, n_qubits) for k in range(1, n_qubits + 1)]


@dataclass(frozen=True)
class DensityState:
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateInvalid(f"density matrix must be square, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, psi) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace_error(self) -> float:
        return abs(np.trace(self.matrix) - 1.0)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def validate(self) -> "DensityState":
        if self.hermiticity_error() > STATE_HERMITIAN_TOL:
            raise StateInvalid(f"not Hermitian (error {self.hermiticity_error():.2e})")
        if self.trace_error() > STATE_TRACE_TOL:
            raise StateInvalid(f"trace off by {self.trace_error():.2e}")
        if self.min_eigenvalue() < -POSITIVITY_TOL:
            raise StateInvalid(f"negative eigenvalue {self.min_eigenvalue():.2e}")
        return self

    def fidelity(self, psi) -> float:
        """``<psi|rho|psi>`` for a pure reference state."""
        psi = np.asarray(psi, dtype=complex)
        return float(np.vdot(psi, self.matrix @ psi).real)


@dataclass
class IntegrationStats:
    """Worst-case bookkeeping collected over one integration."""

    steps: int = 0
    max_trace_drift: float = 0.0
    max_trace_error: float = 0.0
    max_hermiticity_error: float = 0.0
    min_eigenvalue: float = 1.0


class _Dissipator:
    def __init__(self, collapse_ops: Sequence[np.ndarray], rate: float):
        self.rate = rate
        self.ops = [np.asarray(c, dtype=complex) for c in collapse_ops] if rate > 0 else []
        self.diagonal = all(np.count_nonzero(c - np.diag(np.diag(c))) == 0 for c in self.ops)
        if self.ops and self.diagonal:
            # Diagonal jumps act entrywise: D_ij = sum rate (l_i l_j* - (|l_i|^2 + |l_j|^2) / 2).
            dim = self.ops[0].shape[0]
            weights = np.zeros((dim, dim), dtype=complex)
            for c in self.ops:
                l = np.diag(c)
                sq = np.abs(l) ** 2
                weights += np.outer(l, l.conj()) - 0.5 * (sq[:, None] + sq[None, :])
            self.weights = rate * weights
        else:
            self.pairs = [(c, c.conj().T, c.conj().T @ c) for c in self.ops]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        if not self.ops:
            return 0.0
        if self.diagonal:
            return self.weights * rho
        out = np.zeros_like(rho)
        for c, cd, cdc in self.pairs:
            out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
        return self.rate * out


def lindblad_evolve(
    h,
    noise: NoiseSpec,
    rho0: DensityState,
    duration: float,
    dt: float,
    envelope: Callable[[float], float] | None = None,
    stats: IntegrationStats | None = None,
    collapse_ops: Sequence[np.ndarray] | None = None,
) -> DensityState:
    """Integrate ``drho/dt = -i[H(t), rho] + D[rho]`` with fixed-step RK4.

    ``H(t) = envelope(t) * h`` when ``envelope`` is given, else ``h``.
    The last step is shortened so the run ends exactly at ``duration``.

    Raises:
        StepTooLarge: if ``dt * max|envelope| * ||h||`` exceeds 0.05 or
            ``dt > duration``.
        StateInvalid: if ``rho0`` violates the density-matrix invariants,
            or the trace drifts more than 1e-9 in one step, or positivity
            fails during the run.
    """
    h = check_hermitian(h)
    rho0.validate()
    if h.shape != rho0.matrix.shape:
        raise StateInvalid(f"Hamiltonian {h.shape} and state {rho0.matrix.shape} differ in size")
    if not 0 < dt <= duration:
        raise StepTooLarge(f"dt={dt} must lie in (0, duration={duration}]")
    n_steps = int(math.ceil(duration / dt - 1e-9))
    if envelope is None:
        peak = 1.0
    else:
        probe = np.linspace(0.0, duration, 4 * n_steps + 1)
        peak = float(np.max(np.abs([envelope(t) for t in probe])))
    h_norm = float(np.linalg.norm(h, 2))
    if dt * peak * h_norm > STABILITY_LIMIT:
        raise StepTooLarge(f"dt*||H|| = {dt * peak * h_norm:.3g} exceeds {STABILITY_LIMIT}")

    n_qubits = int(round(math.log2(h.shape[0])))
    ops = collapse_ops if collapse_ops is not None else noise.collapse_operators(n_qubits)
    dissipate = _Dissipator(ops, noise.rate)

    def rhs(t: float, rho: np.ndarray) -> np.ndarray:
        ht = h if envelope is None else envelope(t) * h
        return -1j * (ht @ rho - rho @ ht) + dissipate(rho)

    stats = stats if stats is not None else IntegrationStats()
    rho = np.array(rho0.matrix)
    t = 0.0
    for step in range(n_steps):
        step_dt = min(dt, duration - t)
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * step_dt, rho + 0.5 * step_dt * k1)
        k3 = rhs(t + 0.5 * step_dt, rho + 0.5 * step_dt * k2)
        k4 = rhs(t + step_dt, rho + step_dt * k3)
        rho = rho + (step_dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += step_dt

        trace = np.trace(rho)
        drift = abs(trace - 1.0)
        if drift > TRACE_STEP_BUDGET:
            raise StateInvalid(f"trace drifted by {drift:.2e} in one step at t={t:.6g}")
        stats.max_trace_drift = max(stats.max_trace_drift, drift)
        rho = rho / trace.real
        stats.max_trace_error = max(stats.max_trace_error, abs(np.trace(rho) - 1.0))
        stats.max_hermiticity_error = max(
            stats.max_hermiticity_error, float(np.max(np.abs(rho - rho.conj().T)))
        )
        if (step + 1) % _POSITIVITY_CHECK_EVERY == 0 or step == n_steps - 1:
            lam = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
            stats.min_eigenvalue = min(stats.min_eigenvalue, lam)
            if lam < -POSITIVITY_TOL:
                raise StateInvalid(f"density matrix lost positivity (eigenvalue {lam:.2e}) at t={t:.6g}")
    stats.steps += n_steps
    return DensityState(rho)


def lindblad_step(h, noise: NoiseSpec, rho: DensityState, dt: float) -> DensityState:
    """Single RK4 step with a time-independent Hamiltonian."""
    return lindblad_evolve(h, noise, rho, dt, dt)


def _check_in_dfs(evo: ProtocolEvolution, psi: np.ndarray) -> None:
    iso = evo.encoding.isometry()
    outside = psi - iso @ (iso.conj().T @ psi)
    if np.linalg.norm(outside) > 1e-9:
        raise ValueError("input state is not supported on the protocol's DFS")


def open_gate_fidelity(
    spec: ProtocolSpec,
    noise: NoiseSpec,
    input_state,
    steps: int = DEFAULT_STEPS,
    stats: IntegrationStats | None = None,
) -> float:
    """State fidelity of the noisy protocol output with the closed-system output."""
    evo = ProtocolEvolution(spec)
    psi = np.asarray(input_state, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    _check_in_dfs(evo, psi)
    ideal = evo.final_propagator() @ psi
    rho = lindblad_evolve(
        evo.h_unit,
        noise,
        DensityState.from_pure(psi),
        spec.duration,
        spec.duration / steps,
        envelope=lambda t: float(evo.envelope_at(t)),
        stats=stats,
    )
    return float(min(1.0, max(0.0, rho.fidelity(ideal))))


def default_input_state(spec: ProtocolSpec) -> np.ndarray:
    """Uniform superposition of the computational logical states."""
    evo_encoding = ProtocolEvolution(spec).encoding
    labels = ["00_L", "01_L", "10_L", "11_L"] if evo_encoding.n_qubits == 6 else ["0_L", "1_L"]
    psi = sum(evo_encoding.full_vector(label) for label in labels)
    return psi / np.linalg.norm(psi)


def bare_qubit_dephasing(
    rate: float,
    pulse_area: float = TWO_PI,
    duration: float = TWO_PI,
    steps: int = DEFAULT_STEPS,
    stats: IntegrationStats | None = None,
) -> tuple[float, float]:
    """Unencoded contrast: one qubit under ``(J/2) Z`` with independent dephasing.

    Returns ``(simulated, closed_form)`` fidelities for input ``|+>``,
    the closed form being ``(1 + exp(-2 rate duration)) / 2``.
    """
    j = pulse_area / duration
    h = 0.5 * j * pauli_on_site(PauliAxis.Z, 1, 1)
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    ideal = np.exp(-1j * 0.5 * j * duration * np.array([1.0, -1.0])) * plus
    rho = lindblad_evolve(
        h,
        NoiseSpec(rate, Collapse.INDEPENDENT),
        DensityState.from_pure(plus),
        duration,
        duration / steps,
        stats=stats,
    )
    closed = 0.5 * (1.0 + math.exp(-2.0 * rate * duration))
    return rho.fidelity(ideal), closed


def ordered_map(fn, items, workers: int = 1) -> list:
    """Map ``fn`` over ``items``, threaded when ``workers > 1``; result order follows ``items``."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def control_error_sweep(
    spec: ProtocolSpec, epsilon_grid: Sequence[float], workers: int = 1
) -> list[tuple[float, float]]:
    """Logical-gate fidelity against the ideal gate when the pulse area is ``2 pi (1 + eps)``."""
    reference = ProtocolEvolution(replace(spec, pulse_area=TWO_PI)).logical_unitary()

    def one(eps: float) -> tuple[float, float]:
        gate = ProtocolEvolution(replace(spec, pulse_area=TWO_PI * (1.0 + eps))).logical_unitary()
        return float(eps), operator_fidelity(reference, gate)

    return ordered_map(one, list(epsilon_grid), workers)


def envelope_swap_fidelity(spec: ProtocolSpec) -> float:
    """Fidelity between constant and sin^2 envelope gates of equal area."""
    a = ProtocolEvolution(replace(spec, envelope=Envelope.CONSTANT)).logical_unitary()
    b = ProtocolEvolution(replace(spec, envelope=Envelope.SIN_SQUARED)).logical_unitary()
    return operator_fidelity(a, b)


def rate_sweep(
    spec: ProtocolSpec,
    collapse: Collapse,
    rates: Sequence[float],
    input_state=None,
    steps: int = DEFAULT_STEPS,
    workers: int = 1,
) -> list[tuple[float, float]]:
    psi = default_input_state(spec) if input_state is None else input_state

    def one(rate: float) -> tuple[float, float]:
        return float(rate), open_gate_fidelity(spec, NoiseSpec(rate, collapse), psi, steps)

    return ordered_map(one, list(rates), workers)
