#!/usr/bin/env python3
"""
Tests for the quantum gradient / divergence pair, grid differences and kernel checks
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrix_w1.core import operator_norm, random_hermitian, random_skew, real_inner
from matrix_w1.errors import ParameterError, ShapeMismatch, StructureViolation
from matrix_w1.operators import (
    Boundary,
    GradientLOperator,
    Grid1D,
    LFamily,
    MatrixField,
    check_kernel,
    div_L,
    div_x,
    grad_L,
    grad_x,
    op_norm_estimate,
)
from matrix_w1.spectra import TABLE1_L


PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(11)


def _family(n, N, rng):
    return LFamily([random_hermitian(n, rng) for _ in range(N)])


@pytest.mark.parametrize("n,N", [(2, 1), (3, 2), (4, 3)])
def test_grad_div_L_adjoint(rng, n, N):
    """Re tr(grad_L f, u) == Re tr(f, div_L u) on random pairs"""
    L = _family(n, N, rng)
    for _ in range(100):
        f = random_hermitian(n, rng)
        u = np.array([random_skew(n, rng) for _ in range(N)])
        lhs = real_inner(grad_L(L, f).blocks, u)
        rhs = real_inner(f, div_L(L, u).entries)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(f) * np.linalg.norm(u)


def test_div_L_is_traceless(rng):
    L = _family(3, 2, rng)
    for _ in range(100):
        u = np.array([random_skew(3, rng) for _ in range(2)])
        assert abs(np.trace(div_L(L, u).entries)) <= 1e-12


def test_grad_L_blocks_are_skew(rng):
    L = _family(3, 2, rng)
    g = grad_L(L, random_hermitian(3, rng))
    for block in g.blocks:
        assert_allclose(block, -block.conj().T, atol=1e-12)


def test_grad_L_of_identity_vanishes(rng):
    L = _family(2, 2, rng)
    assert operator_norm(grad_L(L, np.eye(2))) <= 1e-14


def test_div_L_rejects_hermitian_flux():
    with pytest.raises(StructureViolation):
        div_L([PAULI_X], np.eye(2)[None])


def test_grad_L_shape_mismatch(rng):
    with pytest.raises(ShapeMismatch):
        grad_L([PAULI_X], random_hermitian(3, rng))


def test_check_kernel():
    """The spectra L family passes; the identity and a single Pauli matrix do not"""
    report = check_kernel(TABLE1_L)
    assert report.passed and report.pass_
    assert report.nullity == 1

    identity = check_kernel([np.eye(2)])
    assert not identity.passed
    assert identity.nullity == 4

    pauli = check_kernel([PAULI_X])
    assert pauli.nullity == 2


def test_lfamily_exposes_kernel():
    family = LFamily(TABLE1_L)
    assert family.N == 2 and family.n == 2
    assert family.kernel.passed
    assert family.gradient_matrix.shape == (8, 4)
    assert not family.matrices.flags.writeable


@pytest.mark.parametrize("boundary", [Boundary.PERIODIC, Boundary.ZERO_FLUX])
def test_grad_div_x_adjoint(rng, boundary):
    """div_x = -grad_x^T under the grid inner product"""
    grid = Grid1D(9, 0.3, boundary)
    for _ in range(100):
        f = MatrixField(grid, np.array([random_hermitian(2, rng) for _ in range(grid.M)]))
        u = np.array([random_hermitian(2, rng) for _ in range(grid.edge_count)])
        lhs = real_inner(grad_x(f).values, u)
        rhs = -real_inner(f.values, div_x(u, grid).values)
        assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(f.values) * np.linalg.norm(u)


def test_grid_edges():
    assert Grid1D(5, 1.0).edge_count == 5
    assert Grid1D(5, 1.0, "zero_flux").edge_count == 4
    grid = Grid1D.periodic_2pi(8)
    assert grid.h == pytest.approx(np.pi / 4)
    assert grid.length == pytest.approx(2 * np.pi)
    assert grid.difference_matrix().shape == (8, 8)


def test_grid_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        Grid1D(1, 1.0)
    with pytest.raises(ParameterError):
        Grid1D(4, 0.0)


def test_grad_x_of_constant_vanishes():
    grid = Grid1D(6, 0.5, "zero_flux")
    f = MatrixField(grid, np.tile(np.eye(2), (6, 1, 1)))
    assert np.max(np.abs(grad_x(f).values)) == 0.0


def test_matrix_field():
    grid = Grid1D(4, 0.25)
    f = MatrixField.from_scalars(grid, [1.0, 2.0, 0.5, 0.5])
    assert f.n == 1 and f.M == 4
    assert f.total_trace() == pytest.approx(1.0)

    with pytest.raises(StructureViolation):
        MatrixField(grid, np.tile(np.array([[1.0, 1.0], [0.0, 1.0]]), (4, 1, 1)))
    with pytest.raises(ShapeMismatch):
        MatrixField(grid, np.zeros(3))
    with pytest.raises(StructureViolation):
        MatrixField.from_scalars(grid, [1.0, -1.0, 0.0, 0.0]).check_density()


def test_op_norm_estimate_matches_svd(rng):
    L = _family(3, 2, rng)
    estimate = op_norm_estimate(GradientLOperator(L), seed=0, max_iter=2000, rtol=1e-12)
    exact = np.linalg.svd(L.gradient_matrix, compute_uv=False)[0]
    assert estimate == pytest.approx(exact, rel=1e-4)
