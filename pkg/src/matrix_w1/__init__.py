"""
Matricial Wasserstein-1 distances between density matrices and matrix-valued densities
"""

from .config import SolverConfig
from .core import (
    BlockVector,
    DensityLikeMatrix,
    HermitianMatrix,
    SkewHermitianMatrix,
    StructureTag,
    hermitian_to_real,
    make_density,
    make_hermitian,
    make_skew,
    nuclear_norm,
    operator_norm,
    real_to_hermitian,
    singular_values,
    trace_inner,
)
from .distances import (
    AuditReport,
    Decomposition,
    DensityTripleSampler,
    FieldTripleSampler,
    PairwiseDistances,
    decompose_v1,
    decomposition_objective,
    field_v1,
    field_w1,
    metric_audit,
    pairwise_distances,
    scalar_w1,
    v1,
    w1,
)
from .errors import (
    KernelViolation,
    MatrixW1Error,
    NotConverged,
    ParameterError,
    ProblemFileError,
    ShapeMismatch,
    SingularConstraint,
    StructureViolation,
    TraceMismatch,
)
from .operators import (
    Boundary,
    Grid1D,
    KernelReport,
    LFamily,
    MatrixField,
    check_kernel,
    div_L,
    div_x,
    grad_L,
    grad_x,
    op_norm_estimate,
)
from .oracle import circular_emd, dual_grid_search, line_emd
from .prox import group_svt, project_affine, svt
from .solver import Certificate, ProblemKind, ProblemSpec, assemble, constraint_residual, recover_dual, solve
from .spectra import (
    AR_POLYNOMIALS,
    REFERENCE_TABLE1,
    PolynomialVariant,
    SpectrumId,
    eval_ar,
    eval_spectrum,
    reproduce_table1,
    sample_spectrum,
    spectra_table,
)

__all__ = [
    'SolverConfig',
    'BlockVector',
    'DensityLikeMatrix',
    'HermitianMatrix',
    'SkewHermitianMatrix',
    'StructureTag',
    'hermitian_to_real',
    'make_density',
    'make_hermitian',
    'make_skew',
    'nuclear_norm',
    'operator_norm',
    'real_to_hermitian',
    'singular_values',
    'trace_inner',
    'AuditReport',
    'Decomposition',
    'DensityTripleSampler',
    'FieldTripleSampler',
    'PairwiseDistances',
    'decompose_v1',
    'decomposition_objective',
    'field_v1',
    'field_w1',
    'metric_audit',
    'pairwise_distances',
    'scalar_w1',
    'v1',
    'w1',
    'KernelViolation',
    'MatrixW1Error',
    'NotConverged',
    'ParameterError',
    'ProblemFileError',
    'ShapeMismatch',
    'SingularConstraint',
    'StructureViolation',
    'TraceMismatch',
    'Boundary',
    'Grid1D',
    'KernelReport',
    'LFamily',
    'MatrixField',
    'check_kernel',
    'div_L',
    'div_x',
    'grad_L',
    'grad_x',
    'op_norm_estimate',
    'circular_emd',
    'dual_grid_search',
    'line_emd',
    'group_svt',
    'project_affine',
    'svt',
    'Certificate',
    'ProblemKind',
    'ProblemSpec',
    'assemble',
    'constraint_residual',
    'recover_dual',
    'solve',
    'AR_POLYNOMIALS',
    'REFERENCE_TABLE1',
    'PolynomialVariant',
    'SpectrumId',
    'eval_ar',
    'eval_spectrum',
    'reproduce_table1',
    'sample_spectrum',
    'spectra_table',
]
