"""Decoherence-free subspaces of collective dephasing and logical bookkeeping."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import DimensionMismatch, NotDecoherenceFree
from .hamiltonian import collective_dephasing_operator

DEFAULT_LEAKAGE_SAMPLES = 201
_EIGEN_TOL = 1e-12


@dataclass(frozen=True)
class DfsEncoding:
    """Ordered product-state basis of a DFS with logical labels.

    ``basis`` is a tuple of ``(label, bits)`` pairs; ``bits[0]`` is qubit 1.
    The order is the matrix order used by :func:`project_to_dfs`.
    """

    n_qubits: int
    basis: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple((str(a), str(b)) for a, b in self.basis))
        labels = [label for label, _ in self.basis]
        states = [bits for _, bits in self.basis]
        if len(set(labels)) != len(labels):
            raise ValueError("encoding labels must be unique")
        if len(set(states)) != len(states):
            raise ValueError("encoding product states must be unique")
        for bits in states:
            if len(bits) != self.n_qubits or set(bits) - {"0", "1"}:
                raise ValueError(f"bad bitstring {bits!r} for {self.n_qubits} qubits")

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.basis]

    def product_state(self, label: str) -> str:
        for name, bits in self.basis:
            if name == label:
                return bits
        raise KeyError(label)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def full_index(self, label: str) -> int:
        return int(self.product_state(label), 2)

    def full_vector(self, label: str) -> np.ndarray:
        v = np.zeros(2**self.n_qubits, dtype=complex)
        v[self.full_index(label)] = 1.0
        return v

    def isometry(self) -> np.ndarray:
        """``2**n x d`` matrix whose columns are the encoded basis states."""
        iso = np.zeros((2**self.n_qubits, self.dim), dtype=complex)
        for j, (_, bits) in enumerate(self.basis):
            iso[int(bits, 2), j] = 1.0
        return iso

    def projector(self) -> np.ndarray:
        iso = self.isometry()
        return iso @ iso.conj().T

    def embed(self, amplitudes) -> np.ndarray:
        """Map DFS-coordinate amplitudes to a full-register state vector."""
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (self.dim,):
            raise DimensionMismatch(f"expected {self.dim} amplitudes, got {amplitudes.shape}")
        return self.isometry() @ amplitudes

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "basis": [{"label": label, "bits": bits} for label, bits in self.basis],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DfsEncoding":
        return cls(int(data["n_qubits"]), tuple((b["label"], b["bits"]) for b in data["basis"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DfsEncoding":
        return cls.from_dict(json.loads(text))


def standard_single_qubit_encoding() -> DfsEncoding:
    """Three-qubit encoding, ordered (ancilla, 1_L, 0_L)."""
    return DfsEncoding(3, (("a", "100"), ("1_L", "001"), ("0_L", "010")))


def standard_two_qubit_encoding() -> DfsEncoding:
    """Six-qubit encoding, ordered (a1, a2, 00_L, 01_L, 10_L, 11_L)."""
    return DfsEncoding(
        6,
        (
            ("a1", "011000"),
            ("a2", "000011"),
            ("00_L", "010010"),
            ("01_L", "010001"),
            ("10_L", "001010"),
            ("11_L", "001001"),
        ),
    )


def verify_dfs(encoding: DfsEncoding) -> float:
    """Return the common collective-dephasing eigenvalue of the encoding.

    Raises:
        NotDecoherenceFree: if some basis state is not an eigenstate of
            ``sum_k Z_k`` or the eigenvalues differ.
    """
    op = collective_dephasing_operator(encoding.n_qubits)
    eigenvalues = []
    for label, _ in encoding.basis:
        v = encoding.full_vector(label)
        w = op @ v
        lam = np.vdot(v, w)
        if np.max(np.abs(w - lam * v)) > _EIGEN_TOL:
            raise NotDecoherenceFree(f"{label} is not an eigenstate of the collective operator")
        eigenvalues.append(lam.real)
    if max(eigenvalues) - min(eigenvalues) > _EIGEN_TOL:
        raise NotDecoherenceFree(f"eigenvalues differ across the encoding: {eigenvalues}")
    return float(eigenvalues[0])


def project_to_dfs(op_full, encoding: DfsEncoding) -> np.ndarray:
    """Matrix elements ``<b_i|op|b_j>`` in encoding order."""
    op_full = np.asarray(op_full, dtype=complex)
    size = 2**encoding.n_qubits
    if op_full.shape != (size, size):
        raise DimensionMismatch(f"operator shape {op_full.shape} does not act on {encoding.n_qubits} qubits")
    idx = [int(bits, 2) for _, bits in encoding.basis]
    return op_full[np.ix_(idx, idx)]


@dataclass(frozen=True)
class LeakageReport:
    max_leakage: float
    sample_times: tuple[float, ...]


def leakage_at(u, encoding: DfsEncoding) -> float:
    """Spectral norm of ``(I - P) U P`` for a single full-register unitary."""
    iso = encoding.isometry()
    out = np.asarray(u) @ iso
    out_of_space = out - iso @ (iso.conj().T @ out)
    return float(np.linalg.norm(out_of_space, 2))


def leakage(
    u_of_t: Callable[[float], np.ndarray],
    encoding: DfsEncoding,
    sample_count: int = DEFAULT_LEAKAGE_SAMPLES,
    duration: float = 1.0,
) -> LeakageReport:
    """Worst leakage out of the DFS over ``sample_count`` uniform times in ``[0, duration]``."""
    if sample_count < 2:
        raise ValueError("sample_count must be at least 2")
    times = np.linspace(0.0, duration, sample_count)
    worst = max(leakage_at(u_of_t(t), encoding) for t in times)
    return LeakageReport(max_leakage=worst, sample_times=tuple(float(t) for t in times))
