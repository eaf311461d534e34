#!/usr/bin/env python3
"""
Tests for the AR spectra and the three-spectrum distance table
"""

import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrix_w1.config import SolverConfig
from matrix_w1.distances import field_v1
from matrix_w1.errors import ParameterError
from matrix_w1.operators import Grid1D, MatrixField, check_kernel
from matrix_w1.spectra import (
    AR_POLYNOMIALS,
    REFERENCE_TABLE1,
    TABLE1_L,
    ARPolynomial,
    PolynomialVariant,
    SpectrumId,
    eval_ar,
    eval_spectrum,
    reproduce_table1,
    sample_spectrum,
    spectra_table,
)


def test_polynomial_variants_differ_in_one_sign():
    """as_printed has -r1^2 z^2 in the first factor, canonical +r1^2 z^2"""
    a0 = AR_POLYNOMIALS["a0"]
    printed = a0.coefficients(PolynomialVariant.AS_PRINTED)
    canonical = a0.coefficients("canonical")
    assert printed.shape == (5,)
    assert printed[0] == canonical[0] == pytest.approx(1.0)
    assert canonical[4] == pytest.approx(0.95 ** 2 * 0.75 ** 2)
    assert printed[4] == pytest.approx(-(0.95 ** 2) * 0.75 ** 2)
    assert canonical[2] - printed[2] == pytest.approx(2 * 0.95 ** 2)


def test_eval_ar_matches_factor_product():
    theta = 0.3
    z = np.exp(1j * theta)
    a1 = AR_POLYNOMIALS["a1"]
    first = 1 - 2 * 0.95 * np.cos(2 * np.pi / 3) * z + 0.95 ** 2 * z ** 2
    second = 1 - 2 * 0.75 * np.cos(5 * np.pi / 8) * z + 0.75 ** 2 * z ** 2
    assert eval_ar("a1", theta, "canonical") == pytest.approx(first * second)
    assert eval_ar(a1, [theta, theta]).shape == (2,)


def test_eval_ar_rejects_roots_on_the_circle():
    root = ARPolynomial("unit", 1.0, 0.0, 0.5, 1.0)
    with pytest.raises(ParameterError):
        root.evaluate(0.0, PolynomialVariant.CANONICAL)


def test_spectra_are_psd_everywhere():
    grid = Grid1D.periodic_2pi(64)
    for variant in PolynomialVariant:
        for spectrum, field in spectra_table(grid, variant).items():
            assert field.M == 64 and field.n == 2
            eig = np.linalg.eigvalsh(field.values)
            scale = np.max(np.abs(field.values))
            assert eig.min() >= -1e-10 * scale


def test_rho0_cross_spectrum_is_real():
    field = sample_spectrum(SpectrumId.RHO0, Grid1D.periodic_2pi(32))
    assert_allclose(field.values[:, 0, 1].imag, 0.0, atol=1e-14)


def test_eval_spectrum_matches_sampled_field():
    grid = Grid1D.periodic_2pi(16)
    field = sample_spectrum("rho1", grid, "canonical")
    point = eval_spectrum("rho1", grid.coordinates[5], "canonical")
    assert_allclose(point.entries, field.values[5], atol=1e-12)


def test_sample_spectrum_needs_frequency_grid():
    with pytest.raises(ParameterError):
        sample_spectrum("rho0", Grid1D(16, 0.1))
    with pytest.raises(ParameterError):
        sample_spectrum("rho0", Grid1D(16, 2 * np.pi / 16, "zero_flux"))
    assert sample_spectrum("rho2", Grid1D.periodic_2pi(2)).M == 2


def test_table1_family_has_trivial_kernel():
    assert check_kernel(TABLE1_L).passed


def test_reproduce_table1_small_grid():
    """Three pairs for one beta; no ordering claim can be checked without both extremes"""
    config = SolverConfig(max_iter=3000, workers=3)
    result = reproduce_table1(Grid1D.periodic_2pi(16), beta_pairs=[(1.0, 1.0)], config=config)
    assert len(result.entries) == 3
    assert result.rotation_claim is None and result.translation_claim is None
    assert not result.passed
    for entry, expected in zip(result.entries, REFERENCE_TABLE1[(1.0, 1.0)]):
        assert entry.error is None
        assert entry.reference_value == expected
        assert entry.value > 0
    assert result.value(1.0, 1.0, "rho2", "rho0") == result.entries[2].value


def test_table1_values_scale_with_the_spectra():
    """field_v1 is positively homogeneous, so the table scales with the spectra"""
    grid = Grid1D.periodic_2pi(8)
    spectra = spectra_table(grid)
    a, b = spectra[SpectrumId.RHO0], spectra[SpectrumId.RHO1]
    base = field_v1(a, b, TABLE1_L, 1.0, 1.0, 1.0)
    scaled = field_v1(MatrixField(grid, 3.0 * a.values), MatrixField(grid, 3.0 * b.values), TABLE1_L, 1.0, 1.0, 1.0)
    assert scaled.value == pytest.approx(3.0 * base.value, rel=1e-5)


@pytest.mark.slow
def test_reproduce_table1_ordering_claims():
    result = reproduce_table1(config=SolverConfig(workers=9))
    assert all(entry.converged and entry.error is None for entry in result.entries)
    assert result.rotation_claim is True
    assert result.translation_claim is True
    assert result.passed


@pytest.mark.slow
@pytest.mark.parametrize("beta1,beta2", [(10.0, 1.0), (1.0, 10.0)])
def test_full_grid_solve_converges_within_a_minute(beta1, beta2):
    spectra = spectra_table(Grid1D.periodic_2pi(512))
    start = time.perf_counter()
    cert = field_v1(spectra[SpectrumId.RHO0], spectra[SpectrumId.RHO2], TABLE1_L, 1.0, beta1, beta2)
    elapsed = time.perf_counter() - start
    assert cert.converged
    assert cert.relative_gap <= 1e-6
    assert elapsed <= 60.0


def test_canonical_a1_dips_at_its_first_angle():
    """|a1| has a local minimum near 2 pi / 3 in the canonical variant"""
    theta = np.linspace(2 * np.pi / 3 - 0.1, 2 * np.pi / 3 + 0.1, 2001)
    modulus = np.abs(eval_ar("a1", theta, "canonical"))
    k = int(np.argmin(modulus))
    assert 0 < k < len(theta) - 1
    assert theta[k] == pytest.approx(2 * np.pi / 3, abs=0.05)


def test_a0_variants_differ_everywhere():
    theta = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
    printed = eval_ar("a0", theta, "as_printed")
    canonical = eval_ar("a0", theta, "canonical")
    assert np.min(np.abs(printed - canonical)) > 0.1
