import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.stats import unitary_group

from dfsgates.exceptions import DegenerateGeometricPhase, NotUnitary, StateNotCyclic
from dfsgates.gates import (
    TWO_PI,
    Envelope,
    GateKind,
    GateReport,
    ProtocolEvolution,
    ProtocolSpec,
    compose_single_qubit,
    dynamical_phase,
    is_entangling,
    logical_basis_for_phase,
    phase_report,
    protocol_config,
    run_protocol,
    target_gate,
)
from dfsgates.hamiltonian import CouplingConfig
from dfsgates.operators import operator_fidelity

KINDS = list(GateKind)
angles = st.floats(-math.pi / 2, math.pi / 2, allow_nan=False)


def schmidt_rank(u, tol=1e-9):
    """Operator Schmidt rank of a 4x4 gate: 1 exactly for product gates."""
    r = np.asarray(u).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    return int(np.sum(np.linalg.svd(r, compute_uv=False) > tol))


def time_ordered_propagator(evo: ProtocolEvolution, segments: int) -> np.ndarray:
    """Product of midpoint-sampled piecewise-constant propagators via scipy expm."""
    spec = evo.spec
    dt = spec.duration / segments
    u = np.eye(evo.h_unit.shape[0], dtype=complex)
    for k in range(segments):
        j = spec.envelope.rate((k + 0.5) * dt, spec.pulse_area, spec.duration)
        u = expm(-1j * evo.h_unit * j * dt) @ u
    return u


def test_protocol_configs():
    assert protocol_config(ProtocolSpec("z", 0.0), 1.0) == CouplingConfig(3, jxy={(1, 3): 1.0}, jz_local={3: -0.0})
    x = protocol_config(ProtocolSpec("x", 0.0), 1.0)
    assert x.jxy[(1, 2)] == pytest.approx(1 / math.sqrt(2))
    assert x.jxy[(1, 3)] == pytest.approx(-1 / math.sqrt(2))
    assert x.jxy[(2, 3)] == 0 and x.jz_local == {2: -0.0, 3: -0.0}
    zz = protocol_config(ProtocolSpec("zz", math.pi / 2), 1.0)
    assert zz.jzz == {(3, 6): 1.0}
    assert zz.jxy[(3, 5)] == pytest.approx(0.0, abs=1e-16)


def test_x_config_satisfies_coupling_chain():
    phi, j = 0.3, 2.0
    c = protocol_config(ProtocolSpec("x", phi), j)
    assert math.sqrt(2) * c.jxy[(1, 2)] == pytest.approx(j * math.cos(phi))
    assert -math.sqrt(2) * c.jxy[(1, 3)] == pytest.approx(j * math.cos(phi))
    for value in (c.jxy[(2, 3)], 2 * c.jz_local[2], 2 * c.jz_local[3]):
        assert value == pytest.approx(-j * math.sin(phi))


def test_spec_validation():
    with pytest.raises(ValueError):
        ProtocolSpec("z", 2.0)
    with pytest.raises(ValueError):
        ProtocolSpec("z", 0.1, segments=1)
    with pytest.raises(ValueError):
        ProtocolSpec("q", 0.1)


def test_z_gate_at_pi_over_six_is_logical_z():
    report = run_protocol(ProtocolSpec("z", math.pi / 6))
    np.testing.assert_allclose(report.logical_unitary, np.diag([1, -1]), atol=1e-12)
    assert report.primary_phase.total_phase == pytest.approx(math.pi, abs=1e-12)
    assert report.leakage.max_leakage <= 1e-12


def test_z_gate_at_zero_is_identity():
    report = run_protocol(ProtocolSpec("z", 0.0))
    np.testing.assert_allclose(report.logical_unitary, np.eye(2), atol=1e-12)
    assert report.primary_phase.total_phase == pytest.approx(0.0, abs=1e-12)
    assert report.primary_phase.ratio is None


def test_zz_gate_quarter_turn():
    report = run_protocol(ProtocolSpec("zz", math.asin(0.25)))
    expected = np.diag([np.exp(-0.5j * math.pi), 1, 1, np.exp(-0.5j * math.pi)])
    np.testing.assert_allclose(report.logical_unitary, expected, atol=1e-12)
    assert report.entangling is True


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("envelope", list(Envelope))
def test_evolution_matches_time_ordered_product(kind, envelope):
    evo = ProtocolEvolution(ProtocolSpec(kind, 0.37, envelope))
    oracle = time_ordered_propagator(evo, 400)
    np.testing.assert_allclose(evo.final_propagator(), oracle, atol=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(KINDS), angles)
def test_gate_matches_closed_form(kind, angle):
    report = run_protocol(ProtocolSpec(kind, angle), leakage_samples=11)
    target = target_gate(kind, TWO_PI * math.sin(angle))
    assert operator_fidelity(report.logical_unitary, target) >= 1 - 1e-10
    np.testing.assert_allclose(report.logical_unitary, target, atol=1e-10)


def test_logical_basis_for_phase():
    (label, z_state), = logical_basis_for_phase(ProtocolSpec("z", 0.1))
    assert label == "1_L"
    np.testing.assert_array_equal(np.flatnonzero(z_state), [int("001", 2)])
    (_, x_state), = logical_basis_for_phase(ProtocolSpec("x", 0.1))
    expected = np.zeros(8, dtype=complex)
    expected[int("010", 2)], expected[int("001", 2)] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    np.testing.assert_allclose(x_state, expected)
    assert [lbl for lbl, _ in logical_basis_for_phase(ProtocolSpec("zz", 0.1))] == ["00_L", "11_L"]


@pytest.mark.parametrize(
    "kind,angle,label,expected",
    [
        ("z", math.pi / 6, "1_L", -2 * math.pi),
        ("z", 0.0, "1_L", 0.0),
        ("zz", math.pi / 6, "11_L", -2 * math.pi),
        ("x", -0.4, "-_L", -4 * math.pi * math.sin(-0.4)),
    ],
)
def test_dynamical_phase_values(kind, angle, label, expected):
    spec = ProtocolSpec(kind, angle)
    state = dict(logical_basis_for_phase(spec))[label]
    assert dynamical_phase(spec, state) == pytest.approx(expected, abs=1e-10)


def test_dynamical_phase_against_adaptive_quadrature():
    spec = ProtocolSpec("x", 0.9, Envelope.SIN_SQUARED)
    evo = ProtocolEvolution(spec)
    (_, psi), = logical_basis_for_phase(spec)
    iso = evo.encoding.isometry()

    def integrand(t):
        area = spec.envelope.running_area(t, spec.pulse_area, spec.duration)
        phi_t = iso.conj().T @ expm(-1j * evo.h_unit * area) @ psi
        j = spec.envelope.rate(t, spec.pulse_area, spec.duration)
        return -j * np.vdot(phi_t, evo.h_logical_unit @ phi_t).real

    oracle, _ = quad(integrand, 0, spec.duration, epsabs=1e-13, limit=200)
    assert evo.dynamical_phase(psi) == pytest.approx(oracle, abs=1e-9)


def test_dynamical_phase_rejects_non_cyclic_state():
    spec = ProtocolSpec("z", 0.3)
    enc = ProtocolEvolution(spec).encoding
    superposition = (enc.full_vector("0_L") + enc.full_vector("1_L")) / math.sqrt(2)
    with pytest.raises(StateNotCyclic):
        dynamical_phase(spec, superposition)


@pytest.mark.parametrize(
    "kind,angle,expected",
    [
        ("z", math.pi / 6, (math.pi, -2 * math.pi, 3 * math.pi)),
        ("x", math.pi / 6, (math.pi, -2 * math.pi, 3 * math.pi)),
        ("zz", -math.pi / 6, (-math.pi, 2 * math.pi, -3 * math.pi)),
    ],
)
def test_phase_reports(kind, angle, expected):
    for rep in phase_report(ProtocolSpec(kind, angle)):
        got = (rep.total_phase, rep.dynamical_phase, rep.geometric_phase)
        np.testing.assert_allclose(got, expected, atol=1e-10)
        assert rep.ratio == pytest.approx(-2 / 3, abs=1e-12)
        assert rep.geometric_phase == rep.total_phase - rep.dynamical_phase


def test_phase_report_degenerate_at_zero_angle():
    with pytest.raises(DegenerateGeometricPhase):
        phase_report(ProtocolSpec("x", 0.0))


def test_sign_flipped_field_breaks_ratio():
    spec = ProtocolSpec("z", 0.3)
    config = protocol_config(spec)
    bad = CouplingConfig(3, config.jxy, {}, {3: -config.jz_local[3]})
    rep = ProtocolEvolution(spec, bad).phase_reports()[0]
    assert abs(rep.ratio + 2 / 3) > 0.1


@pytest.mark.parametrize("gamma,expected", [(math.pi / 2, True), (math.pi, False), (0.0, False), (-math.pi, False), (1.0, True)])
def test_entangling_controlled_phase(gamma, expected):
    gate = target_gate("zz", gamma)
    assert is_entangling(gate) is expected
    assert (schmidt_rank(gate) > 1) is expected


def test_entangling_identity_and_known_gates():
    assert is_entangling(np.eye(4)) is False
    cnot = np.eye(4)[[0, 1, 3, 2]]
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert is_entangling(cnot) and is_entangling(swap)


def test_entangling_rejects_non_unitary():
    with pytest.raises(NotUnitary):
        is_entangling(2 * np.eye(4))
    with pytest.raises(NotUnitary):
        is_entangling(np.eye(2))


@pytest.mark.parametrize("seed", range(8))
def test_entangling_agrees_with_schmidt_oracle(seed):
    a = unitary_group.rvs(2, random_state=seed)
    b = unitary_group.rvs(2, random_state=seed + 100)
    local = np.exp(0.3j * seed) * np.kron(a, b)
    generic = unitary_group.rvs(4, random_state=seed)
    assert is_entangling(local) is False and schmidt_rank(local) == 1
    assert is_entangling(generic) is True and schmidt_rank(generic) > 1


def test_compose_empty_and_single():
    assert np.array_equal(compose_single_qubit([]).unitary, np.eye(2))
    comp = compose_single_qubit([("z", math.pi)])
    assert operator_fidelity(comp.unitary, np.diag([1, -1])) == pytest.approx(1, abs=1e-12)
    assert comp.angle_parameters == pytest.approx((math.pi / 6,))


def test_compose_reaches_hadamard():
    def rot(axis, gamma):
        return expm(0.5j * gamma * axis)

    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    euler = rot(z, math.pi / 2) @ rot(x, math.pi / 2) @ rot(z, math.pi / 2)
    hadamard = (x + z) / math.sqrt(2)
    assert operator_fidelity(euler, hadamard) == pytest.approx(1.0, abs=1e-14)
    u = compose_single_qubit([("z", math.pi / 2), ("x", math.pi / 2), ("z", math.pi / 2)]).unitary
    assert operator_fidelity(u, euler) >= 1 - 1e-12
    assert operator_fidelity(u, hadamard) >= 1 - 1e-9


@pytest.mark.parametrize("kind", KINDS)
def test_report_json_round_trip(kind):
    report = run_protocol(ProtocolSpec(kind, 0.41, Envelope.SIN_SQUARED))
    text = report.to_json()
    again = GateReport.from_json(text)
    assert again == report
    assert again.to_json() == text
