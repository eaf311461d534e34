#!/usr/bin/env python3
"""
Tests for the w1_cli command line
"""

import csv
import json

import numpy as np
import pytest

from matrix_w1.cli import EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, load_certificate_flux, main
from matrix_w1.problem_file import load_problem
from matrix_w1.solver import ProblemKind, assemble, constraint_residual


PAULI = {
    "kind": "balanced_matrix",
    "rho0": [[1, 0], [0, 0]],
    "rho1": [[0, 0], [0, 1]],
    "L": [[[0, 1], [1, 0]]],
    "solver": {"tol_gap": 1e-8},
}


def _write(tmp_path, name, document):
    path = tmp_path / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def _stdout_value(out, key):
    for line in out.splitlines():
        if line.startswith(f"{key}:"):
            return line.split(":", 1)[1].strip()
    raise AssertionError(f"{key} missing from output:\n{out}")


def test_w1_pauli(tmp_path, capsys):
    code = main(["w1", _write(tmp_path, "pauli.json", PAULI)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert float(_stdout_value(out, "value")) == pytest.approx(1.0, abs=1e-6)
    assert float(_stdout_value(out, "gap")) <= 1e-6
    assert _stdout_value(out, "converged") == "True"


def test_w1_identical_marginals(tmp_path, capsys):
    document = dict(PAULI, rho1=PAULI["rho0"])
    assert main(["w1", _write(tmp_path, "same.json", document)]) == EXIT_OK
    assert _stdout_value(capsys.readouterr().out, "value") == "0.000000"


def test_w1_unequal_traces_points_to_v1(tmp_path, capsys):
    document = dict(PAULI, rho1=[[0, 0], [0, 2]])
    assert main(["w1", _write(tmp_path, "unequal.json", document)]) == EXIT_INPUT
    assert "v1" in capsys.readouterr().err


def test_schema_error_reports_pointer(tmp_path, capsys):
    document = dict(PAULI, rho0=[[1, "x"], [0, 0]])
    assert main(["w1", _write(tmp_path, "bad.json", document)]) == EXIT_INPUT
    assert "/rho0/0/1" in capsys.readouterr().err


def test_usage_error_is_an_input_error():
    assert main(["w1"]) == EXIT_INPUT


def test_not_converged_exit_code(tmp_path):
    rng = np.random.default_rng(4)
    g0 = rng.standard_normal((3, 3))
    g1 = rng.standard_normal((3, 3))
    rho0, rho1 = g0 @ g0.T, g1 @ g1.T
    rho0 /= np.trace(rho0)
    rho1 /= np.trace(rho1)
    document = {
        "kind": "balanced_matrix",
        "rho0": rho0.tolist(),
        "rho1": rho1.tolist(),
        "L": [np.diag([1.0, 2.0, 4.0]).tolist(), (np.ones((3, 3)) - np.eye(3)).tolist()],
    }
    assert main(["w1", _write(tmp_path, "hard.json", document), "--max-iter", "1"]) == EXIT_NOT_CONVERGED


def test_v1_needs_alpha(tmp_path, capsys):
    document = dict(PAULI, kind="unbalanced_matrix", rho1=[[0, 0], [0, 0.5]])
    path = _write(tmp_path, "v1.json", document)
    assert main(["v1", path]) == EXIT_INPUT
    assert "alpha" in capsys.readouterr().err
    assert main(["v1", path, "--alpha", "2.0"]) == EXIT_OK
    assert float(_stdout_value(capsys.readouterr().out, "value")) > 0


def test_certificate_round_trip(tmp_path):
    """A stored flux re-checked against the constraint gives the reported residual"""
    problem_path = _write(tmp_path, "pauli.json", PAULI)
    out = tmp_path / "cert.json"
    assert main(["w1", problem_path, "--out", str(out)]) == EXIT_OK

    stored = json.loads(out.read_text(encoding="utf-8"))
    for key in ("value", "dual_value", "gap", "residual", "iterations", "converged", "flux", "potential"):
        assert key in stored

    loaded = load_problem(problem_path)
    problem = assemble(ProblemKind.BALANCED_MATRIX, loaded.rho0, loaded.rho1, loaded.L, config=loaded.config)
    flux = load_certificate_flux(out)
    assert flux.shape == problem.layout.shape
    assert constraint_residual(problem, flux) == pytest.approx(stored["residual"], abs=1e-10)


def test_field_command_with_flags(tmp_path, capsys):
    document = {
        "kind": "balanced_field",
        "rho0": [2.0, 0.0, 0.0, 0.0],
        "rho1": [0.0, 2.0, 0.0, 0.0],
        "grid": {"M": 4, "h": 0.5},
    }
    path = _write(tmp_path, "scalar.json", document)
    assert main(["field", path]) == EXIT_OK
    assert float(_stdout_value(capsys.readouterr().out, "value")) == pytest.approx(0.5, abs=1e-6)

    assert main(["field", path, "--beta1", "3.0"]) == EXIT_OK
    assert float(_stdout_value(capsys.readouterr().out, "value")) == pytest.approx(0.5 / 3.0, abs=1e-6)

    assert main(["field", _write(tmp_path, "pauli.json", PAULI)]) == EXIT_INPUT


def test_field_spectra_csv(tmp_path):
    document = {
        "kind": "unbalanced_field",
        "rho0": {"spectrum": "rho0"},
        "rho1": {"spectrum": "rho1"},
        "L": [[[1, 0], [0, 0]], [[1, 1], [1, 0]]],
        "alpha": 1.0,
    }
    csv_path = tmp_path / "spectra.csv"
    code = main(
        ["field", _write(tmp_path, "spec.json", document), "--grid-size", "8", "--max-iter", "50", "--spectra-csv", str(csv_path)]
    )
    assert code in (EXIT_OK, EXIT_NOT_CONVERGED)
    with open(csv_path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0][:3] == ["theta", "rho0_11_re", "rho0_11_im"]
    assert len(rows) == 9
    assert len(rows[0]) == 1 + 2 * 2 * 4


def test_spectra_csv_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["spectra", "--grid-size", "16", "--out", str(first)]) == EXIT_OK
    assert main(["spectra", "--grid-size", "16", "--out", str(second)]) == EXIT_OK
    data = first.read_bytes()
    assert data == second.read_bytes()
    assert b"\r\n" not in data
    assert data.startswith(b"theta,rho0_11_re,rho0_11_im")
    assert data.count(b"\n") == 17


def test_table1_command_writes_nine_rows(tmp_path, capsys):
    out = tmp_path / "table1.csv"
    code = main(["table1", "--grid-size", "8", "--max-iter", "200", "--out", str(out)])
    with open(out, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["beta1", "beta2", "pair", "value", "gap", "converged", "reference_value"]
    assert len(rows) == 10
    assert rows[1][2] == "rho0,rho1"
    assert float(rows[1][6]) == 77.85
    printed = capsys.readouterr().out
    assert "ordering claim rotation" in printed
    assert "ordering claim translation" in printed
    if "FAIL ordering claim" in printed:
        assert code == EXIT_CHECK_FAILED
    elif any(row[5] == "false" for row in rows[1:]):
        assert code == EXIT_NOT_CONVERGED
    else:
        assert code == EXIT_OK


def test_check_command(capsys):
    assert main(["check", "--count", "1", "--dims", "2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "0 failure(s)" in out


def test_check_rejects_bad_dims():
    assert main(["check", "--dims", "1"]) == EXIT_INPUT


def test_field_spectra_csv_uses_spectrum_ids(tmp_path):
    document = {
        "kind": "unbalanced_field",
        "rho0": {"spectrum": "rho2"},
        "rho1": [[[1, 0], [0, 1]]] * 8,
        "L": [[[1, 0], [0, 0]], [[1, 1], [1, 0]]],
        "alpha": 1.0,
        "grid": {"M": 8, "h": "auto2pi"},
    }
    csv_path = tmp_path / "spectra.csv"
    main(["field", _write(tmp_path, "mixed.json", document), "--max-iter", "20", "--spectra-csv", str(csv_path)])
    with open(csv_path, newline="", encoding="utf-8") as f:
        header = next(csv.reader(f))
    assert "rho2_11_re" in header
    assert "rho1_22_im" in header
    assert not any(column.startswith("rho0_") for column in header)


def test_command_line_flags_win_over_file_solver_section(tmp_path, capsys):
    document = dict(PAULI, solver={"tol_gap": 1e-8, "max_iter": 50000})
    path = _write(tmp_path, "pauli.json", document)
    assert main(["w1", path, "--max-iter", "1"]) == EXIT_NOT_CONVERGED
    assert _stdout_value(capsys.readouterr().out, "iterations") == "1"
    assert load_problem(path, overrides={"max_iter": 7}).config.max_iter == 7
    assert load_problem(path).config.max_iter == 50000
