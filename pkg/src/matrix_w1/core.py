"""
Matrix containers, structural validation and the operator / nuclear norms
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ShapeMismatch, StructureViolation


TOL_STRUCT = 1e-12
TOL_PSD_REL = 1e-10
TOL_PSD_ABS = 1e-12
SQRT2 = np.sqrt(2.0)


class StructureTag(Enum):
    """Structural class of an n x n block"""
    HERMITIAN = "hermitian"
    SKEW = "skew"
    GENERAL = "general"


def _square(entries) -> np.ndarray:
    arr = np.array(entries, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ShapeMismatch(f"expected a non-empty square matrix, got shape {arr.shape}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """(A + A^H)/2 on the last two axes"""
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def skew_part(a: np.ndarray) -> np.ndarray:
    """(A - A^H)/2 on the last two axes"""
    return 0.5 * (a - np.conj(np.swapaxes(a, -1, -2)))


def structure_defect(a: np.ndarray, tag: StructureTag) -> float:
    """Largest entrywise violation of the tag's symmetry, relative to max |a_ij|"""
    if tag is StructureTag.GENERAL:
        return 0.0
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale == 0.0:
        return 0.0
    adj = np.conj(np.swapaxes(a, -1, -2))
    diff = a - adj if tag is StructureTag.HERMITIAN else a + adj
    return float(np.max(np.abs(diff))) / scale


def _check_structure(a: np.ndarray, tag: StructureTag, tol: float) -> None:
    defect = structure_defect(a, tag)
    if defect > tol:
        raise StructureViolation(f"matrix is not {tag.value} (relative defect {defect:.3e} > {tol:.1e})")


@dataclass(frozen=True)
class HermitianMatrix:
    """An n x n Hermitian matrix (immutable)"""
    entries: np.ndarray
    tol_struct: float = field(default=TOL_STRUCT, repr=False, compare=False)

    def __post_init__(self):
        arr = _square(self.entries)
        _check_structure(arr, StructureTag.HERMITIAN, self.tol_struct)
        object.__setattr__(self, "entries", _frozen(arr))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def tag(self) -> StructureTag:
        return StructureTag.HERMITIAN

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class SkewHermitianMatrix:
    """An n x n skew-Hermitian matrix (immutable)"""
    entries: np.ndarray
    tol_struct: float = field(default=TOL_STRUCT, repr=False, compare=False)

    def __post_init__(self):
        arr = _square(self.entries)
        _check_structure(arr, StructureTag.SKEW, self.tol_struct)
        object.__setattr__(self, "entries", _frozen(arr))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def tag(self) -> StructureTag:
        return StructureTag.SKEW

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def psd_tolerance(trace: float) -> float:
    return max(TOL_PSD_REL * abs(trace), TOL_PSD_ABS)


@dataclass(frozen=True)
class DensityLikeMatrix:
    """Hermitian PSD matrix; trace is free (balanced problems compare traces)"""
    base: HermitianMatrix

    def __post_init__(self):
        if not isinstance(self.base, HermitianMatrix):
            object.__setattr__(self, "base", HermitianMatrix(self.base))
        eig = self.base.eigvalsh()
        tr = self.base.trace()
        lowest = float(eig.min())
        if lowest < -psd_tolerance(tr):
            raise StructureViolation(f"matrix is not PSD: most negative eigenvalue {lowest:.3e}")
        if tr <= 0 and np.any(self.base.entries != 0):
            raise StructureViolation(f"nonzero density-like matrix must have positive trace, got {tr:.3e}")

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def trace(self) -> float:
        return self.base.trace()

    @property
    def tag(self) -> StructureTag:
        return StructureTag.HERMITIAN

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.base.entries, dtype=dtype)


TagLike = Union[StructureTag, str]


@dataclass(frozen=True)
class BlockVector:
    """K same-size n x n blocks, read as the stacked (K n) x n matrix for norms"""
    blocks: np.ndarray
    tags: Tuple[StructureTag, ...] = ()
    tol_struct: float = field(default=TOL_STRUCT, repr=False, compare=False)

    def __post_init__(self):
        arr = np.array(self.blocks, dtype=complex)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ShapeMismatch(f"blocks must be K x n x n, got shape {arr.shape}")
        tags = tuple(StructureTag(t) if not isinstance(t, StructureTag) else t for t in self.tags)
        if not tags:
            tags = (StructureTag.GENERAL,) * arr.shape[0]
        if len(tags) != arr.shape[0]:
            raise ShapeMismatch(f"{len(tags)} tags for {arr.shape[0]} blocks")
        for block, tag in zip(arr, tags):
            _check_structure(block, tag, self.tol_struct)
        object.__setattr__(self, "blocks", _frozen(arr))
        object.__setattr__(self, "tags", tags)

    @classmethod
    def from_blocks(cls, blocks: Iterable, tag: TagLike = StructureTag.GENERAL) -> "BlockVector":
        arr = np.array([np.asarray(b, dtype=complex) for b in blocks])
        return cls(arr, (StructureTag(tag) if not isinstance(tag, StructureTag) else tag,) * len(arr))

    @property
    def n(self) -> int:
        return self.blocks.shape[1]

    @property
    def size(self) -> int:
        return self.blocks.shape[0]

    def stacked(self) -> np.ndarray:
        return self.blocks.reshape(-1, self.n)

    def __len__(self) -> int:
        return self.size


MatrixLike = Union[np.ndarray, HermitianMatrix, SkewHermitianMatrix, DensityLikeMatrix, BlockVector, Sequence]


def as_stacked(m: MatrixLike) -> np.ndarray:
    """Stacked 2-D complex array for any supported container"""
    if isinstance(m, BlockVector):
        return m.stacked()
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 3:
        arr = arr.reshape(-1, arr.shape[-1])
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a matrix or stacked blocks, got shape {arr.shape}")
    return arr


def make_hermitian(entries, tol_struct: float = TOL_STRUCT) -> HermitianMatrix:
    """Validate membership in the Hermitian matrices; never symmetrizes"""
    if isinstance(entries, HermitianMatrix):
        return entries
    if isinstance(entries, DensityLikeMatrix):
        return entries.base
    return HermitianMatrix(np.asarray(entries, dtype=complex), tol_struct)


def make_skew(entries, tol_struct: float = TOL_STRUCT) -> SkewHermitianMatrix:
    if isinstance(entries, SkewHermitianMatrix):
        return entries
    return SkewHermitianMatrix(np.asarray(entries, dtype=complex), tol_struct)


def make_density(entries) -> DensityLikeMatrix:
    if isinstance(entries, DensityLikeMatrix):
        return entries
    return DensityLikeMatrix(make_hermitian(entries))


def singular_values(m: MatrixLike) -> np.ndarray:
    arr = as_stacked(m)
    if arr.size == 0:
        return np.zeros(0)
    return np.linalg.svd(arr, compute_uv=False)


def nuclear_norm(m: MatrixLike) -> float:
    """Sum of singular values of the stacked matrix"""
    return float(np.sum(singular_values(m)))


def operator_norm(m: MatrixLike) -> float:
    """Largest singular value of the stacked matrix"""
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def _tag_of(x) -> Optional[Tuple[StructureTag, ...]]:
    if isinstance(x, BlockVector):
        return x.tags
    if isinstance(x, (HermitianMatrix, SkewHermitianMatrix, DensityLikeMatrix)):
        return (x.tag,)
    return None


def trace_inner(x: MatrixLike, y: MatrixLike) -> Union[float, complex]:
    """Hilbert-Schmidt product tr(X^H Y), summed over blocks

    Real when both arguments carry the same Hermitian or skew structure.
    """
    a = np.asarray(x.blocks if isinstance(x, BlockVector) else x, dtype=complex)
    b = np.asarray(y.blocks if isinstance(y, BlockVector) else y, dtype=complex)
    if a.shape != b.shape:
        raise ShapeMismatch(f"inner product of shapes {a.shape} and {b.shape}")
    value = complex(np.vdot(a.ravel(), b.ravel()))
    tx, ty = _tag_of(x), _tag_of(y)
    if tx is not None and tx == ty and all(t is not StructureTag.GENERAL for t in tx):
        return value.real
    return value


def real_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Re tr(A^H B): the real inner product of the flux and codomain spaces"""
    return float(np.real(np.vdot(a, b)))


@lru_cache(maxsize=None)
def _upper(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


def hermitian_to_real(a: np.ndarray) -> np.ndarray:
    """Orthonormal real coordinates (n^2 of them) of Hermitian matrices on the last two axes"""
    a = np.asarray(a)
    n = a.shape[-1]
    iu, ju = _upper(n)
    diag = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    upper = a[..., iu, ju]
    return np.concatenate([diag, SQRT2 * upper.real, SQRT2 * upper.imag], axis=-1)


def real_to_hermitian(r: np.ndarray, n: int) -> np.ndarray:
    """Inverse of hermitian_to_real"""
    r = np.asarray(r, dtype=float)
    iu, ju = _upper(n)
    m = len(iu)
    out = np.zeros(r.shape[:-1] + (n, n), dtype=complex)
    idx = np.arange(n)
    out[..., idx, idx] = r[..., :n]
    upper = (r[..., n:n + m] + 1j * r[..., n + m:]) / SQRT2
    out[..., iu, ju] = upper
    out[..., ju, iu] = np.conj(upper)
    return out


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitian_part(g)


def random_skew(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return skew_part(g)


def random_density(n: int, rng: np.random.Generator, trace: float = 1.0) -> np.ndarray:
    """G G^H / tr(G G^H) from a complex Gaussian G, scaled to the given trace"""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = g @ np.conj(g.T)
    rho = hermitian_part(rho)
    return trace * rho / np.real(np.trace(rho))
