"""
Quantum gradient / divergence, spatial differences on 1-D grids and operator-norm estimation

The flux space and the Hermitian codomain are treated as real vector spaces
with the inner product Re tr(X^H Y); all adjoints below are taken with respect
to it.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import (
    TOL_STRUCT,
    BlockVector,
    HermitianMatrix,
    StructureTag,
    hermitian_part,
    hermitian_to_real,
    make_density,
    make_hermitian,
    real_to_hermitian,
    structure_defect,
)
from .errors import ParameterError, ShapeMismatch, StructureViolation


logger = logging.getLogger(__name__)


class RealLinearOperator(ABC):
    """Abstract real-linear operator between complex array spaces"""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    @abstractmethod
    def domain_shape(self) -> Tuple[int, ...]:
        """Shape of a domain element"""
        pass

    @property
    @abstractmethod
    def codomain_shape(self) -> Tuple[int, ...]:
        """Shape of a codomain element"""
        pass

    @abstractmethod
    def apply(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def adjoint(self, y: np.ndarray) -> np.ndarray:
        pass

    def project_domain(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the structured part of the domain (identity by default)"""
        return x

    def sample_domain(self, rng: np.random.Generator) -> np.ndarray:
        shape = self.domain_shape
        x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return self.project_domain(x)


class IdentityOperator(RealLinearOperator):
    """Identity on the n x n Hermitian matrices"""

    def __init__(self, n: int):
        super().__init__()
        self.n = n

    @property
    def domain_shape(self) -> Tuple[int, ...]:
        return (self.n, self.n)

    @property
    def codomain_shape(self) -> Tuple[int, ...]:
        return (self.n, self.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.array(x, dtype=complex)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.array(y, dtype=complex)

    def project_domain(self, x: np.ndarray) -> np.ndarray:
        return hermitian_part(x)


class ScaledOperator(RealLinearOperator):
    """c * A for a real scalar c"""

    def __init__(self, base: RealLinearOperator, factor: float):
        super().__init__()
        self.base = base
        self.factor = float(factor)

    @property
    def domain_shape(self) -> Tuple[int, ...]:
        return self.base.domain_shape

    @property
    def codomain_shape(self) -> Tuple[int, ...]:
        return self.base.codomain_shape

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.factor * self.base.apply(x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return self.factor * self.base.adjoint(y)

    def project_domain(self, x: np.ndarray) -> np.ndarray:
        return self.base.project_domain(x)


# --- quantum gradient ------------------------------------------------------


def commutator_grad(matrices: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Blocks L_k f - f L_k; f may carry leading batch axes (..., n, n) -> (..., N, n, n)"""
    f = np.asarray(f, dtype=complex)[..., None, :, :]
    return matrices @ f - f @ matrices


def commutator_div(matrices: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sum_k L_k u_k - u_k L_k over the block axis (..., N, n, n) -> (..., n, n)"""
    u = np.asarray(u, dtype=complex)
    return np.sum(matrices @ u - u @ matrices, axis=-3)


@dataclass(frozen=True)
class KernelReport:
    """Null space of grad_L on the Hermitian matrices"""
    nullity: int
    passed: bool
    singular_values: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)  # nullity x n^2, real coordinates

    @property
    def pass_(self) -> bool:
        return self.passed


def _gradient_matrix(matrices: np.ndarray) -> np.ndarray:
    n = matrices.shape[-1]
    eye = np.eye(n * n)
    basis = real_to_hermitian(eye, n)  # (n^2, n, n)
    blocks = commutator_grad(matrices, basis)  # (n^2, N, n, n) skew
    # -i S is Hermitian for skew S and the map is an isometry
    coords = hermitian_to_real(-1j * blocks)  # (n^2, N, n^2)
    return coords.reshape(n * n, -1).T


class LFamily:
    """Ordered family L = [L_1, ..., L_N] of Hermitian n x n matrices"""

    def __init__(self, matrices: Sequence, kernel_tol: float = 1e-10):
        self.logger = logging.getLogger(self.__class__.__name__)
        validated = [make_hermitian(m) for m in matrices]
        if not validated:
            raise ShapeMismatch("an L family needs at least one matrix")
        n = validated[0].n
        if any(m.n != n for m in validated):
            raise ShapeMismatch(f"all L matrices must be {n} x {n}")
        arr = np.array([m.entries for m in validated])
        arr.flags.writeable = False
        self.matrices = arr
        self.kernel_tol = kernel_tol
        self.kernel = check_kernel(self)
        if not self.kernel.passed:
            self.logger.warning(
                f"grad_L has a {self.kernel.nullity}-dimensional kernel on Hermitian matrices (expected 1)"
            )

    @property
    def N(self) -> int:
        return self.matrices.shape[0]

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    @cached_property
    def gradient_matrix(self) -> np.ndarray:
        """Real (N n^2) x n^2 matrix of grad_L in orthonormal Hermitian / skew coordinates"""
        return _gradient_matrix(self.matrices)

    def __len__(self) -> int:
        return self.N

    def __repr__(self) -> str:
        return f"LFamily(N={self.N}, n={self.n}, nullity={self.kernel.nullity})"


def as_lfamily(L, kernel_tol: float = 1e-10) -> LFamily:
    if isinstance(L, LFamily):
        return L
    return LFamily(L, kernel_tol)


def check_kernel(L) -> KernelReport:
    """Dimension of the null space of grad_L restricted to Hermitian inputs; passes iff it is 1"""
    matrices = L.matrices if isinstance(L, LFamily) else np.array([make_hermitian(m).entries for m in L])
    tol = L.kernel_tol if isinstance(L, LFamily) else 1e-10
    n = matrices.shape[-1]
    g = _gradient_matrix(matrices)
    _, s, vt = np.linalg.svd(g)
    top = float(s[0]) if s.size else 0.0
    small = s <= tol * top if top > 0 else np.ones_like(s, dtype=bool)
    nullity = int(np.count_nonzero(small)) + (n * n - len(s))
    basis = vt[n * n - nullity:] if nullity else np.zeros((0, n * n))
    return KernelReport(nullity=nullity, passed=nullity == 1, singular_values=s, basis=basis)


def grad_L(L, f) -> BlockVector:
    L = as_lfamily(L)
    f = make_hermitian(f)
    if f.n != L.n:
        raise ShapeMismatch(f"f is {f.n} x {f.n} but L acts on {L.n} x {L.n}")
    blocks = commutator_grad(L.matrices, f.entries)
    return BlockVector(blocks, (StructureTag.SKEW,) * L.N, tol_struct=1e-10)


def div_L(L, u) -> HermitianMatrix:
    L = as_lfamily(L)
    blocks = np.asarray(u.blocks if isinstance(u, BlockVector) else u, dtype=complex)
    if blocks.ndim == 2:
        blocks = blocks[None]
    if blocks.shape != L.matrices.shape:
        raise ShapeMismatch(f"expected {L.N} blocks of {L.n} x {L.n}, got shape {blocks.shape}")
    for k, block in enumerate(blocks):
        defect = structure_defect(block, StructureTag.SKEW)
        if defect > TOL_STRUCT:
            raise StructureViolation(f"flux block {k} is not skew-Hermitian (defect {defect:.3e})")
    return HermitianMatrix(commutator_div(L.matrices, blocks), tol_struct=1e-10)


class GradientLOperator(RealLinearOperator):
    """grad_L as a real-linear map from Hermitian matrices to N skew blocks"""

    def __init__(self, L):
        super().__init__()
        self.L = as_lfamily(L)

    @property
    def domain_shape(self) -> Tuple[int, ...]:
        return (self.L.n, self.L.n)

    @property
    def codomain_shape(self) -> Tuple[int, ...]:
        return (self.L.N, self.L.n, self.L.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return commutator_grad(self.L.matrices, x)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return commutator_div(self.L.matrices, y)

    def project_domain(self, x: np.ndarray) -> np.ndarray:
        return hermitian_part(x)


# --- spatial grid ----------------------------------------------------------


class Boundary(Enum):
    PERIODIC = "periodic"
    ZERO_FLUX = "zero_flux"


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid x_k = k h, k = 0..M-1"""
    M: int
    h: float = 1.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        if int(self.M) != self.M or self.M < 2:
            raise ParameterError(f"grid needs M >= 2 points, got {self.M}")
        if not self.h > 0:
            raise ParameterError(f"grid spacing must be positive, got {self.h}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def periodic_2pi(cls, M: int) -> "Grid1D":
        """Frequency grid over [0, 2 pi) with h = 2 pi / M"""
        return cls(M, 2.0 * np.pi / M, Boundary.PERIODIC)

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def edge_count(self) -> int:
        return self.M if self.periodic else self.M - 1

    @property
    def coordinates(self) -> np.ndarray:
        return self.h * np.arange(self.M)

    @property
    def length(self) -> float:
        return self.M * self.h if self.periodic else (self.M - 1) * self.h

    def difference_matrix(self) -> np.ndarray:
        """E x M real forward-difference matrix (divided by h)"""
        d = np.zeros((self.edge_count, self.M))
        edges = np.arange(self.edge_count)
        d[edges, edges] = -1.0
        d[edges, (edges + 1) % self.M] = 1.0
        return d / self.h


def forward_difference(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    """(f_{k+1} - f_k)/h along axis 0; wraps on periodic grids, M-1 rows on zero-flux grids"""
    values = np.asarray(values)
    if values.shape[0] != grid.M:
        raise ShapeMismatch(f"field has {values.shape[0]} points, grid has {grid.M}")
    if grid.periodic:
        return (np.roll(values, -1, axis=0) - values) / grid.h
    return (values[1:] - values[:-1]) / grid.h


def backward_difference(edges: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Negative adjoint of forward_difference: (u_k - u_{k-1})/h with u_{-1} = u_{M-1} = 0 on zero-flux grids"""
    edges = np.asarray(edges)
    if edges.shape[0] != grid.edge_count:
        raise ShapeMismatch(f"flux has {edges.shape[0]} edges, grid has {grid.edge_count}")
    if grid.periodic:
        return (edges - np.roll(edges, 1, axis=0)) / grid.h
    pad = np.zeros((1,) + edges.shape[1:], dtype=edges.dtype)
    full = np.concatenate([pad, edges, pad], axis=0)
    return (full[1:] - full[:-1]) / grid.h


@dataclass(frozen=True)
class MatrixField:
    """Hermitian matrix per grid point"""
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None, None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatch(f"field values must be M x n x n, got shape {arr.shape}")
        if arr.shape[0] != self.grid.M:
            raise ShapeMismatch(f"field has {arr.shape[0]} points, grid has {self.grid.M}")
        for k, value in enumerate(arr):
            defect = structure_defect(value, StructureTag.HERMITIAN)
            if defect > 1e-10:
                raise StructureViolation(f"field value at point {k} is not Hermitian (defect {defect:.3e})")
        arr = hermitian_part(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_scalars(cls, grid: Grid1D, values: Sequence[float]) -> "MatrixField":
        return cls(grid, np.asarray(values, dtype=float)[:, None, None])

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def M(self) -> int:
        return self.values.shape[0]

    def traces(self) -> np.ndarray:
        return np.real(np.trace(self.values, axis1=1, axis2=2))

    def total_trace(self) -> float:
        """Left-endpoint quadrature h * sum_k tr f(x_k)"""
        return float(self.grid.h * np.sum(self.traces()))

    def check_density(self) -> "MatrixField":
        """Raise StructureViolation unless every value is PSD"""
        for k, value in enumerate(self.values):
            try:
                make_density(value)
            except StructureViolation as e:
                raise StructureViolation(f"field value at point {k}: {e}") from e
        return self

    def __getitem__(self, k: int) -> HermitianMatrix:
        return HermitianMatrix(self.values[k])


@dataclass(frozen=True)
class EdgeField:
    """One Hermitian block per grid edge (the spatial part of a field flux)"""
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.ndim == 1:
            arr = arr[:, None, None]
        if arr.shape[0] != self.grid.edge_count:
            raise ShapeMismatch(f"edge field has {arr.shape[0]} rows, grid has {self.grid.edge_count} edges")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def blocks(self) -> list:
        return [BlockVector(v[None], (StructureTag.HERMITIAN,), tol_struct=1e-10) for v in self.values]


def grad_x(f: MatrixField, grid: Optional[Grid1D] = None) -> EdgeField:
    grid = grid or f.grid
    return EdgeField(grid, forward_difference(f.values, grid))


def div_x(u, grid: Optional[Grid1D] = None) -> MatrixField:
    if isinstance(u, EdgeField):
        grid = grid or u.grid
        u = u.values
    if grid is None:
        raise ParameterError("div_x needs a grid for a bare array")
    values = np.asarray(u, dtype=complex)
    if values.ndim == 1:
        values = values[:, None, None]
    return MatrixField(grid, backward_difference(values, grid))


# --- norm estimation -------------------------------------------------------


def op_norm_estimate(
    A: RealLinearOperator, seed: int = 0, max_iter: int = 200, rtol: float = 1e-6
) -> float:
    """Power iteration on A^T A from a seeded random start"""
    rng = np.random.default_rng(seed)
    x = A.sample_domain(rng)
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0
    x = x / norm
    estimate = 0.0
    for it in range(max_iter):
        y = A.project_domain(A.adjoint(A.apply(x)))
        lam = float(np.linalg.norm(y))
        if lam == 0.0:
            return 0.0
        x = y / lam
        previous, estimate = estimate, np.sqrt(lam)
        if it > 0 and abs(estimate - previous) <= rtol * estimate:
            break
    return float(estimate)
