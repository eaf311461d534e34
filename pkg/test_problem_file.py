#!/usr/bin/env python3
"""
Tests for problem-file validation and conversion
"""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrix_w1.config import SolverConfig
from matrix_w1.errors import ProblemFileError
from matrix_w1.operators import MatrixField
from matrix_w1.problem_file import json_pointer, load_problem, parse_problem
from matrix_w1.solver import ProblemKind


PAULI = {
    "kind": "balanced_matrix",
    "rho0": [[1, 0], [0, 0]],
    "rho1": [[0, 0], [0, 1]],
    "L": [[[0, 1], [1, 0]]],
}


def _paths(document):
    with pytest.raises(ProblemFileError) as info:
        parse_problem(document)
    return info.value.paths


def test_parse_matrix_problem():
    problem = parse_problem(PAULI)
    assert problem.kind is ProblemKind.BALANCED_MATRIX
    assert_allclose(problem.rho0, np.diag([1.0, 0.0]))
    assert problem.L.shape == (1, 2, 2)
    assert problem.grid is None


def test_complex_entries():
    document = dict(PAULI, rho0=[[0.5, [0.0, 0.5]], [[0.0, -0.5], 0.5]])
    problem = parse_problem(document)
    assert problem.rho0[0, 1] == pytest.approx(0.5j)
    assert problem.rho0[1, 0] == pytest.approx(-0.5j)


def test_unknown_key_rejected():
    assert _paths(dict(PAULI, colour="blue")) == ["/colour"]


def test_missing_key_reported():
    document = {k: v for k, v in PAULI.items() if k != "kind"}
    assert "/kind" in _paths(document)


def test_bad_entry_points_into_the_matrix():
    document = dict(PAULI, rho0=[[1, "x"], [0, 0]])
    assert _paths(document) == ["/rho0/0/1"]


def test_non_square_matrix():
    assert _paths(dict(PAULI, rho1=[[0, 0, 1], [0, 1, 0]])) == ["/rho1"]


def test_negative_alpha_rejected():
    document = dict(PAULI, kind="unbalanced_matrix", alpha=-1.0)
    assert _paths(document) == ["/alpha"]


def test_solver_overrides():
    problem = parse_problem(dict(PAULI, solver={"max_iter": 123, "tol_gap": 1e-9}), SolverConfig(workers=2))
    assert problem.config.max_iter == 123
    assert problem.config.tol_gap == 1e-9
    assert problem.config.workers == 2

    assert _paths(dict(PAULI, solver={"max_itr": 5})) == ["/solver/max_itr"]
    assert _paths(dict(PAULI, solver={"max_iter": 0})) == ["/solver/max_iter"]


def test_spectrum_refs_need_field_kind():
    document = dict(PAULI, rho0={"spectrum": "rho0"})
    assert _paths(document) == ["/rho0"]


def test_spectrum_field_problem():
    document = {
        "kind": "unbalanced_field",
        "rho0": {"spectrum": "rho0"},
        "rho1": {"spectrum": "rho2", "variant": "canonical"},
        "L": [[[1, 0], [0, 0]], [[1, 1], [1, 0]]],
        "alpha": 1.0,
        "beta1": 10.0,
        "beta2": 1.0,
        "grid": {"M": 32, "h": "auto2pi"},
    }
    problem = parse_problem(document)
    assert isinstance(problem.rho0, MatrixField)
    assert problem.grid.M == 32
    assert problem.grid.h == pytest.approx(2 * np.pi / 32)
    assert problem.beta1 == 10.0


def test_spectrum_without_grid_uses_default():
    document = {"kind": "unbalanced_field", "rho0": {"spectrum": "rho0"}, "rho1": {"spectrum": "rho1"}, "alpha": 1.0}
    problem = parse_problem(document)
    assert problem.grid.M == 512


def test_scalar_field_problem():
    document = {
        "kind": "balanced_field",
        "rho0": [2.0, 0.0, 0.0, 0.0],
        "rho1": [0.0, 0.0, 2.0, 0.0],
        "grid": {"M": 4, "h": 0.5, "boundary": "zero_flux"},
    }
    problem = parse_problem(document)
    assert problem.rho0.n == 1
    assert problem.L is None
    assert not problem.grid.periodic


def test_field_without_grid_rejected():
    document = {"kind": "balanced_field", "rho0": [1.0, 0.0], "rho1": [0.0, 1.0]}
    assert _paths(document) == ["/grid"]


def test_load_problem(tmp_path):
    path = tmp_path / "pauli.json"
    path.write_text(json.dumps(PAULI), encoding="utf-8")
    assert load_problem(path).kind is ProblemKind.BALANCED_MATRIX

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ProblemFileError):
        load_problem(broken)
    with pytest.raises(ProblemFileError):
        load_problem(tmp_path / "missing.json")


def test_json_pointer_escaping():
    document = {"a/b": [{"c~d": 1}]}
    assert json_pointer(("a/b", 0, "c~d"), document) == "/a~1b/0/c~0d"
