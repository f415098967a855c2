import json
import math
import subprocess
import sys

import numpy as np
import pytest

from moyal_geometry import cli, recurrence as rc
from moyal_geometry.export import fmt, read_csv


def run(tmp_path, *argv):
    return cli.main(["-o", str(tmp_path), *argv])


def sidecar(path):
    data = json.loads(path.read_text())
    assert {"command", "params", "precision", "library_version", "wall_time_seconds", "timestamp"} <= set(data)
    return data


def test_classical_summary(tmp_path, capsys):
    assert run(tmp_path, "classical", "--A", "1", "--a", "1", "--b", "1") == 0
    line = capsys.readouterr().out
    assert "R=8 " in line and f"V={fmt(math.pi)}" in line and f"GB={fmt(8 * math.pi)}" in line
    rows = read_csv(tmp_path / "classical.csv")
    assert all(float(r["curvature"]) == pytest.approx(8, rel=1e-8) for r in rows)
    assert sidecar(tmp_path / "classical.json")["command"] == "classical"


def test_classical_quadrature(tmp_path):
    assert run(tmp_path, "classical", "--A", "1", "--a", "2", "--b", "1", "--quadrature") == 0
    gbq = sidecar(tmp_path / "classical.json")["summary"]["gauss_bonnet_quadrature"]
    assert gbq == pytest.approx(16 * math.pi, rel=1e-3)


def test_classical_validation_error(tmp_path, capsys):
    assert run(tmp_path, "classical", "--a", "0.5") == cli.EXIT_INVALID
    assert "a must be >= 1" in capsys.readouterr().err


def test_solve_reports_exponent_and_gb(tmp_path, capsys):
    assert run(tmp_path, "solve", "--R", "1", "--phi0", "1", "--N", "6001") == 0
    out = capsys.readouterr().out
    assert "a_hat=" in out and "GB estimate=" in out
    rows = read_csv(tmp_path / "solution.csv")
    assert len(rows) == 6001 and rows[-1]["gb_partial_n"] == ""
    diag = sidecar(tmp_path / "solution.json")["diagnostics"]
    gb, a = diag["gauss_bonnet_estimate"], diag["exponent"]["a_hat"]
    # the two estimators differ by ~6% at this seed; see the acceptance suite
    assert abs(gb / (8 * math.pi * a) - 1) < 0.1


def test_solve_constant(tmp_path):
    assert run(tmp_path, "solve", "--R", "0", "--phi0", "2", "--N", "100") == 0
    assert {r["phi_n"] for r in read_csv(tmp_path / "solution.csv")} == {"2"}


def test_solve_rosenberg_writes_partial_sequence(tmp_path):
    code = run(tmp_path, "solve", "--variant", "rosenberg", "--c", "1", "--phi0", "1", "--N", "1000")
    assert code == cli.EXIT_NUMERIC
    rows = read_csv(tmp_path / "solution.csv")
    assert len(rows) > 3
    assert "failure" in sidecar(tmp_path / "solution.json")["diagnostics"]


def test_solve_invalid(tmp_path):
    assert run(tmp_path, "solve", "--phi0", "0") == cli.EXIT_INVALID


def test_precision_disagreement_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(rc, "precision_disagreement", lambda problem, index=None: 1e-3)
    assert run(tmp_path, "solve", "--N", "200", "--check-precision") == cli.EXIT_PRECISION
    assert run(tmp_path, "solve", "--N", "200") == 0


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["perturb", "--theta", "0", "--num", "5"]) == 0
    assert (tmp_path / "env" / "deformed_factor.csv").exists()


def _model_solver(phi0, R, N):
    # phi_n = n^a with the exponent carried by the seed
    n = np.arange(N, dtype=float)
    n[0] = 1.0
    return n**phi0


def test_scan_hook_model_sequences(tmp_path):
    rows = cli.run_scan([1.0, 1.5, 2.0], 1.0, out_path=tmp_path / "s.csv", solver=_model_solver)
    assert [r[1] for r in rows] == pytest.approx([1.0, 1.5, 2.0], abs=1e-14)
    assert [float(r["a_hat"]) for r in read_csv(tmp_path / "s.csv")] == pytest.approx([1.0, 1.5, 2.0])


def test_scan_resume_skips_done_seeds(tmp_path):
    calls = []

    def counting(phi0, R, N):
        calls.append(phi0)
        return _model_solver(phi0, R, N)

    path = tmp_path / "s.csv"
    cli.run_scan([1.0, 2.0], 1.0, out_path=path, solver=counting)
    calls.clear()
    rows = cli.run_scan([1.0, 2.0, 3.0], 1.0, out_path=path, solver=counting, resume=True)
    assert calls == [3.0]
    assert [r[0] for r in rows] == [1.0, 2.0, 3.0]
    assert len(read_csv(path)) == 3


def test_scan_records_failures():
    rows = cli.run_scan([0.01, 1.0], 1.0)
    assert rows[0][1] is None and rows[0][-1]
    assert rows[1][-1] == ""


def test_scaled_scan_shifts_exponent_column():
    seeds, lam = [0.5, 1.0, 2.0], 3.0
    base = cli.run_scan(seeds, 1.0)
    scaled = cli.run_scan([lam * s for s in seeds], lam**2)
    shift = math.log(lam) / math.log(rc.ESTIMATOR_N)
    assert [s[1] - b[1] for s, b in zip(scaled, base)] == pytest.approx([shift] * 3, abs=1e-10)


def test_scan_command_brackets_one(tmp_path):
    assert run(tmp_path, "scan", "--phi0-min", "0.5", "--phi0-max", "2", "--num", "5", "--workers", "2") == 0
    a = [float(r["a_hat"]) for r in read_csv(tmp_path / "scan.csv")]
    assert min(a) < 1 < max(a)
    assert sidecar(tmp_path / "scan.json")["failures"] == 0


def test_scan_validation(tmp_path):
    assert run(tmp_path, "scan", "--phi0-min", "2", "--phi0-max", "1") == cli.EXIT_INVALID
    assert run(tmp_path, "scan", "--N", "100") == cli.EXIT_INVALID


def test_fs_command(tmp_path, capsys):
    assert run(tmp_path, "fs", "--R", "1", "--tol", "1e-3") == 0
    data = sidecar(tmp_path / "fs.json")
    assert abs(data["exponent"]["a_hat"] - 1) <= 1e-3
    assert read_csv(tmp_path / "fs_series.csv")


def test_perturb_commands(tmp_path):
    assert run(tmp_path, "perturb", "--theta", "0", "--eta", "0.5", "--C1", "-0.333333") == 0
    rows = read_csv(tmp_path / "deformed_factor.csv")
    for row in rows:
        r = float(row["r"])
        assert float(row["factor_theta0"]) == pytest.approx(1 / (0.5 * (1 + r * r)), rel=1e-15)
    assert run(tmp_path, "perturb", "--eta", "0.5", "--C1", "-0.333333", "--theta", "0.5", "1.0") == 0
    first = read_csv(tmp_path / "deformed_factor.csv")[0]
    assert float(first["factor_theta0.5"]) == pytest.approx(2, abs=1e-5)
    assert float(first["factor_theta1"]) == pytest.approx(2, abs=1e-5)


def test_perturb_failure_when_denominator_vanishes(tmp_path):
    assert run(tmp_path, "perturb", "--theta", "3", "--C1", "-5") == cli.EXIT_NUMERIC


def test_selfcheck(tmp_path, capsys):
    assert run(tmp_path, "selfcheck", "--seed", "7", "--trials", "5") == 0
    assert "ok" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "moyal_geometry", "-o", str(tmp_path), "solve", "--N", "50"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "solution.csv").exists()


def test_fmt_roundtrip():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(None) == "" and fmt(float("nan")) == "" and fmt(True) == "true" and fmt(np.int64(3)) == "3"
