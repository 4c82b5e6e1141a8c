import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dfsgates.cli import main
from dfsgates.gates import GateReport

PI_6 = "0.5235987755982988"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gate_z_report(capsys):
    code, out, _ = run(capsys, "gate", "z", "--theta", PI_6)
    assert code == 0
    data = json.loads(out)
    assert data["total_phase"] == pytest.approx(math.pi, abs=1e-10)
    assert data["ratio"] == pytest.approx(-2 / 3, abs=1e-10)
    assert len(data["logical_unitary"]) == 4


def test_gate_zz_at_zero_is_identity(capsys):
    code, out, _ = run(capsys, "gate", "zz", "--phi", "0")
    data = json.loads(out)
    assert code == 0 and data["entangling"] is False
    u = np.array([complex(*z) for z in data["logical_unitary"]]).reshape(4, 4)
    np.testing.assert_allclose(u, np.eye(4), atol=1e-11)


def test_gate_envelope_does_not_change_gate(capsys):
    _, const, _ = run(capsys, "gate", "x", "--phi", PI_6)
    _, sin2, _ = run(capsys, "gate", "x", "--phi", PI_6, "--envelope", "sin2")
    a, b = json.loads(const), json.loads(sin2)
    np.testing.assert_allclose(a["logical_unitary"], b["logical_unitary"], atol=1e-10)


def test_gate_json_round_trips(capsys, tmp_path):
    path = tmp_path / "report.json"
    assert main(["gate", "zz", "--phi", "0.3", "--out", str(path)]) == 0
    text = path.read_text()
    assert GateReport.from_json(text).to_json() + "\n" == text


def test_numbers_use_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "gate", "z", "--theta", "0.3")
    phase = json.loads(out)["total_phase"]
    assert phase == float(f"{2 * math.pi * math.sin(0.3):.12g}")


@pytest.mark.parametrize(
    "argv",
    [
        ["gate", "q"],
        ["gate", "x", "--theta", "0.2"],
        ["gate", "z", "--theta", "3"],
        ["sweep", "--gate", "z", "--theta-min", "1", "--theta-max", "0", "--steps", "3"],
        ["sweep", "--gate", "z", "--steps", "3"],
        ["lindblad", "--rate", "-1"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_one(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects before dispatch
        code = exc.code
    assert code == 1


def test_phases_command(capsys):
    code, out, _ = run(capsys, "phases", "--gate", "zz", "--phi", "-0.5235987755982988")
    rows = json.loads(out)
    assert code == 0 and [r["state"] for r in rows] == ["00_L", "11_L"]
    for r in rows:
        assert r["total_phase"] == pytest.approx(-math.pi, abs=1e-10)
        assert r["geometric_phase"] == pytest.approx(-3 * math.pi, abs=1e-10)


def test_phases_degenerate_exits_two(capsys):
    code, _, err = run(capsys, "phases", "--gate", "z", "--theta", "0")
    assert code == 2 and "DegenerateGeometricPhase" in err


def test_angle_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--gate", "z", "--theta-min", "-1.5", "--theta-max", "1.5", "--steps", "31", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 31
    for row in rows:
        if abs(math.sin(float(row["angle"]))) >= 0.05:
            assert float(row["ratio"]) == pytest.approx(-2 / 3, abs=1e-10)


def test_entangling_column_sweep(capsys):
    code, out, _ = run(
        capsys, "sweep", "--gate", "zz", "--phi-min", "0", "--phi-max", "1.5", "--steps", "16", "--column", "entangling", "--format", "csv"
    )
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["angle", "entangling"]
    assert [r["entangling"] for r in rows] == ["false"] + ["true"] * 15


def test_single_point_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--gate", "z", "--theta-min", "0", "--theta-max", "0", "--steps", "1")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 1 and rows[0]["ratio"] is None


def test_epsilon_sweep_header(capsys):
    code, out, _ = run(
        capsys, "sweep", "--over", "epsilon", "--gate", "z", "--theta", PI_6,
        "--epsilon-min", "-0.01", "--epsilon-max", "0.01", "--steps", "3", "--format", "csv",
    )
    lines = out.strip().splitlines()
    assert lines[0] == "epsilon,fidelity" and lines[2] == "0,1"


def test_rate_sweep_header(capsys):
    code, out, _ = run(
        capsys, "sweep", "--over", "rate", "--gate", "z", "--theta", "0.3",
        "--rate-min", "0", "--rate-max", "1", "--steps", "2", "--rk-steps", "1000", "--format", "csv",
    )
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "rate,fidelity" and len(lines) == 3


def test_lindblad_command(capsys):
    code, out, _ = run(capsys, "lindblad", "--gate", "z", "--theta", PI_6, "--rate", "10")
    data = json.loads(out)
    assert code == 0 and data["fidelity"] >= 1 - 1e-6
    code, out, _ = run(capsys, "lindblad", "--bare", "--rate", "1")
    data = json.loads(out)
    assert data["fidelity"] == pytest.approx(data["closed_form"], abs=1e-4)


def test_certify_passes_and_detects_sign_bug(capsys):
    code, out, _ = run(capsys, "certify", "--grid", "5")
    assert code == 0 and "13/13 checks passed" in out
    code, out, _ = run(capsys, "certify", "--grid", "5", "--corrupt-sign", "--format", "json")
    data = json.loads(out)
    checks = {c["name"]: c["passed"] for c in data["checks"]}
    assert code == 2 and not data["passed"]
    assert checks["ratio_constant_minus_two_thirds"] is False
    assert checks["leakage"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dfsgates", "gate", "z", "--theta", "0.2"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["kind"] == "z"
