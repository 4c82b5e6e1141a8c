"""Unconventional nonadiabatic geometric gates in decoherence-free subspaces."""
from .encoding import (
    DfsEncoding,
    LeakageReport,
    leakage,
    project_to_dfs,
    standard_single_qubit_encoding,
    standard_two_qubit_encoding,
    verify_dfs,
)
from .gates import (
    Envelope,
    GateKind,
    GateReport,
    PhaseReport,
    ProtocolEvolution,
    ProtocolSpec,
    compose_single_qubit,
    dynamical_phase,
    is_entangling,
    logical_basis_for_phase,
    makhlin_invariants,
    phase_report,
    protocol_config,
    run_protocol,
    target_gate,
)
from .hamiltonian import (
    CouplingConfig,
    PauliAxis,
    build_hamiltonian,
    build_rxy,
    build_rz,
    collective_dephasing_operator,
    pauli_on_site,
)

from .lindblad import (
    Collapse,
    DensityState,
    NoiseSpec,
    control_error_sweep,
    lindblad_evolve,
    open_gate_fidelity,
)

__version__ = "0.1.0"
