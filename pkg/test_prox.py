#!/usr/bin/env python3
"""
Tests for singular-value thresholding and the affine projection
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrix_w1.config import SolverConfig
from matrix_w1.core import nuclear_norm, operator_norm, random_density, random_hermitian, real_inner
from matrix_w1.errors import ParameterError, ShapeMismatch
from matrix_w1.operators import Grid1D, MatrixField
from matrix_w1.prox import group_svt, project_affine, svt, weighted_group_svt
from matrix_w1.solver import ProblemKind, assemble


@pytest.fixture
def rng():
    return np.random.default_rng(3)


def _complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_svt_shrinks_singular_values(rng):
    m = _complex(rng, 4, 3)
    s = np.linalg.svd(m, compute_uv=False)
    tau = float(s[1])
    shrunk = svt(m, tau)
    assert_allclose(np.linalg.svd(shrunk, compute_uv=False), np.maximum(s - tau, 0.0), atol=1e-12)


def test_svt_optimality(rng):
    """X = svt(M, tau) satisfies ||M - X||_op <= tau and <M - X, X> = tau ||X||_*"""
    m = _complex(rng, 3, 3)
    tau = 0.8
    x = svt(m, tau)
    assert operator_norm(m - x) <= tau + 1e-12
    assert real_inner(m - x, x) == pytest.approx(tau * nuclear_norm(x), abs=1e-12)


def test_svt_edge_cases(rng):
    m = _complex(rng, 2, 2)
    assert_allclose(svt(m, 0.0), m)
    assert np.max(np.abs(svt(m, 1e6))) == 0.0
    with pytest.raises(ParameterError):
        svt(m, -1.0)


def test_group_svt_matches_single(rng):
    stacked = _complex(rng, 5, 6, 2)
    thresholds = rng.uniform(0.1, 1.0, 5)
    batched = group_svt(stacked, thresholds)
    for k in range(5):
        assert_allclose(batched[k], svt(stacked[k], thresholds[k]), atol=1e-12)


def test_weighted_group_svt(rng):
    blocks = [_complex(rng, 2, 2), _complex(rng, 4, 2)]
    out = weighted_group_svt(blocks, [1.0, 2.0], 0.5)
    assert_allclose(out[1], svt(blocks[1], 1.0), atol=1e-12)
    with pytest.raises(ShapeMismatch):
        weighted_group_svt(blocks, [1.0], 0.5)
    with pytest.raises(ParameterError):
        weighted_group_svt(blocks, [1.0, 0.0], 0.5)


def _matrix_problem(rng, projection="auto"):
    L = [random_hermitian(3, rng) for _ in range(2)]
    config = SolverConfig(projection=projection)
    return assemble(ProblemKind.BALANCED_MATRIX, random_density(3, rng), random_density(3, rng), L, config=config)


def _field_problem(rng, projection="auto"):
    grid = Grid1D(6, 0.5, "zero_flux")
    rho0 = MatrixField(grid, np.array([random_density(2, rng, 1.0) for _ in range(6)]))
    rho1 = MatrixField(grid, np.array([random_density(2, rng, 0.8) for _ in range(6)]))
    config = SolverConfig(projection=projection)
    L = [np.diag([1.0, 0.0]), np.array([[1.0, 1.0], [1.0, 0.0]])]
    return assemble(ProblemKind.UNBALANCED_FIELD, rho0, rho1, L, alpha=2.0, beta1=1.5, beta2=0.5, config=config)


@pytest.mark.parametrize("build", [_matrix_problem, _field_problem])
def test_projection_is_feasible_and_orthogonal(rng, build):
    problem = build(rng)
    layout = problem.layout
    z = _complex(rng, *layout.shape)
    w = project_affine(z, problem.affine)

    assert problem.affine.residual(w) <= 1e-10
    assert_allclose(layout.project_structure(w), w, atol=1e-12)

    # z - w is orthogonal to every direction inside the affine set
    other = project_affine(_complex(rng, *layout.shape), problem.affine)
    assert abs(real_inner(z - w, other - w)) <= 1e-9 * np.linalg.norm(z) * np.linalg.norm(other - w)

    assert_allclose(project_affine(w, problem.affine), w, atol=1e-10)


@pytest.mark.parametrize("build", [_matrix_problem, _field_problem])
def test_factorized_and_cg_projections_agree(build):
    z_rng = np.random.default_rng(5)
    dense = build(np.random.default_rng(9), "factorized")
    iterative = build(np.random.default_rng(9), "cg")
    z = _complex(z_rng, *dense.layout.shape)
    assert_allclose(project_affine(z, dense.affine), project_affine(z, iterative.affine), atol=1e-8)


def test_svt_is_firmly_nonexpansive(rng):
    """||P a - P b||^2 <= <P a - P b, a - b> for the nuclear norm prox"""
    for _ in range(50):
        a, b = _complex(rng, 4, 2), _complex(rng, 4, 2)
        tau = rng.uniform(0.0, 2.0)
        d = svt(a, tau) - svt(b, tau)
        assert real_inner(d, d) <= real_inner(d, a - b) + 1e-12


@pytest.mark.parametrize("build", [_matrix_problem, _field_problem])
def test_projection_is_idempotent(rng, build):
    problem = build(rng, "factorized")
    config = SolverConfig()
    for _ in range(5):
        z = _complex(rng, *problem.layout.shape)
        w = project_affine(z, problem.affine)
        again = project_affine(w, problem.affine)
        assert np.linalg.norm(again - w) <= 2 * config.cg_tol * max(1.0, float(np.linalg.norm(z)))
