"""XXZ spin Hamiltonians on a register of up to six qubits.

Qubits are labelled 1..n with qubit 1 the leftmost (most significant)
tensor factor, and ``sigma_z |0> = +|0>``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .exceptions import SiteOutOfRange
from .operators import IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z

MAX_QUBITS = 6


class PauliAxis(enum.Enum):
    X = "X"
    Y = "Y"
    Z = "Z"


_PAULI = {PauliAxis.X: SIGMA_X, PauliAxis.Y: SIGMA_Y, PauliAxis.Z: SIGMA_Z}


def _check_register(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise SiteOutOfRange(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")


def _check_site(site: int, n_qubits: int) -> None:
    _check_register(n_qubits)
    if not 1 <= site <= n_qubits:
        raise SiteOutOfRange(f"site {site} outside 1..{n_qubits}")


def _check_pair(k: int, l: int, n_qubits: int) -> None:
    _check_site(k, n_qubits)
    _check_site(l, n_qubits)
    if not k < l:
        raise SiteOutOfRange(f"pair ({k}, {l}) must satisfy k < l")


def pauli_on_site(axis: PauliAxis | str, site: int, n_qubits: int) -> np.ndarray:
    """Embed a single Pauli matrix at ``site`` of an ``n_qubits`` register."""
    _check_site(site, n_qubits)
    factors = [IDENTITY2] * n_qubits
    factors[site - 1] = _PAULI[PauliAxis(axis)]
    return reduce(np.kron, factors)


def build_rxy(k: int, l: int, n_qubits: int) -> np.ndarray:
    """Flip-flop term ``(X_k X_l + Y_k Y_l) / 2``."""
    _check_pair(k, l, n_qubits)
    xx = pauli_on_site(PauliAxis.X, k, n_qubits) @ pauli_on_site(PauliAxis.X, l, n_qubits)
    yy = pauli_on_site(PauliAxis.Y, k, n_qubits) @ pauli_on_site(PauliAxis.Y, l, n_qubits)
    return 0.5 * (xx + yy)


def build_rz(k: int, l: int, n_qubits: int) -> np.ndarray:
    _check_pair(k, l, n_qubits)
    return pauli_on_site(PauliAxis.Z, k, n_qubits) @ pauli_on_site(PauliAxis.Z, l, n_qubits)


def collective_dephasing_operator(n_qubits: int) -> np.ndarray:
    """System factor ``sum_k Z_k`` of a collective dephasing coupling."""
    _check_register(n_qubits)
    return sum(pauli_on_site(PauliAxis.Z, m, n_qubits) for m in range(1, n_qubits + 1))


@dataclass(frozen=True)
class CouplingConfig:
    """Nonzero XXZ coupling strengths; absent keys mean zero.

    ``jxy[(k, l)]`` multiplies the flip-flop term, ``jzz[(k, l)]`` the
    ``Z_k Z_l`` term and ``jz_local[m]`` the local field ``Z_m``.
    """

    n_qubits: int
    jxy: dict[tuple[int, int], float] = field(default_factory=dict)
    jzz: dict[tuple[int, int], float] = field(default_factory=dict)
    jz_local: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        _check_register(self.n_qubits)
        for k, l in list(self.jxy) + list(self.jzz):
            _check_pair(k, l, self.n_qubits)
        for m in self.jz_local:
            _check_site(m, self.n_qubits)

    def __add__(self, other: "CouplingConfig") -> "CouplingConfig":
        if other.n_qubits != self.n_qubits:
            raise SiteOutOfRange("cannot add configs on different registers")

        def merge(a, b):
            out = dict(a)
            for key, value in b.items():
                out[key] = out.get(key, 0.0) + value
            return out

        return CouplingConfig(
            self.n_qubits,
            merge(self.jxy, other.jxy),
            merge(self.jzz, other.jzz),
            merge(self.jz_local, other.jz_local),
        )

    def scaled(self, factor: float) -> "CouplingConfig":
        return CouplingConfig(
            self.n_qubits,
            {key: factor * v for key, v in self.jxy.items()},
            {key: factor * v for key, v in self.jzz.items()},
            {key: factor * v for key, v in self.jz_local.items()},
        )

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "jxy": [[k, l, v] for (k, l), v in sorted(self.jxy.items())],
            "jzz": [[k, l, v] for (k, l), v in sorted(self.jzz.items())],
            "jz_local": [[m, v] for m, v in sorted(self.jz_local.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CouplingConfig":
        return cls(
            n_qubits=int(data["n_qubits"]),
            jxy={(int(k), int(l)): float(v) for k, l, v in data.get("jxy", [])},
            jzz={(int(k), int(l)): float(v) for k, l, v in data.get("jzz", [])},
            jz_local={int(m): float(v) for m, v in data.get("jz_local", [])},
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CouplingConfig":
        return cls.from_dict(json.loads(text))


def build_hamiltonian(config: CouplingConfig) -> np.ndarray:
    """Assemble the full ``2**n x 2**n`` XXZ Hamiltonian for ``config``."""
    n = config.n_qubits
    h = np.zeros((2**n, 2**n), dtype=complex)
    for (k, l), value in config.jxy.items():
        h += value * build_rxy(k, l, n)
    for (k, l), value in config.jzz.items():
        h += value * build_rz(k, l, n)
    for m, value in config.jz_local.items():
        h += value * pauli_on_site(PauliAxis.Z, m, n)
    return h
