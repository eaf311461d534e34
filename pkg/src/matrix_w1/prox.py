"""
Singular-value thresholding and the exact projection onto {w : A w = b}
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, cg

from .core import hermitian_to_real, real_to_hermitian
from .errors import ParameterError, ShapeMismatch, SingularConstraint
from .operators import RealLinearOperator


logger = logging.getLogger(__name__)

KERNEL_RESIDUAL_TOL = 1e-8


def svt(m: np.ndarray, tau: float) -> np.ndarray:
    """Prox of tau * nuclear norm: U max(S - tau, 0) V^H"""
    if tau < 0:
        raise ParameterError(f"threshold must be >= 0, got {tau}")
    m = np.asarray(m, dtype=complex)
    if tau == 0:
        return m.copy()
    return group_svt(m[None], np.array([tau]))[0]


def group_svt(stacked: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Batched svt over the leading axis of (G, rows, cols) with one threshold per group"""
    stacked = np.asarray(stacked, dtype=complex)
    if stacked.size == 0:
        return stacked.copy()
    u, s, vh = np.linalg.svd(stacked, full_matrices=False)
    shrunk = np.maximum(s - np.asarray(thresholds, dtype=float)[:, None], 0.0)
    return (u * shrunk[:, None, :]) @ vh


def weighted_group_svt(blocks: Sequence[np.ndarray], weights: Sequence[float], tau: float) -> List[np.ndarray]:
    """svt of each group with threshold tau * w_i"""
    if len(blocks) != len(weights):
        raise ShapeMismatch(f"{len(blocks)} groups but {len(weights)} weights")
    if any(w <= 0 for w in weights):
        raise ParameterError("group weights must be positive")
    return [svt(b, tau * w) for b, w in zip(blocks, weights)]


# --- Gram solves for (A A^H)^+ ---------------------------------------------


class GramSolver(ABC):
    """Applies the pseudo-inverse of A A^H on the Hermitian codomain"""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def solve(self, r: np.ndarray) -> Tuple[np.ndarray, float]:
        """Returns (A A^H)^+ r and the norm of r's component in the kernel of A A^H"""
        pass


class FactorizedGram(GramSolver):
    """A A^H = b1^2 (D^T D kron I) + I kron b2^2 G^T G + c I, diagonalized factor by factor

    D is the grid difference matrix (or empty for a single point), G the real
    matrix of grad_L (or empty when the L part is dropped) and c = 1 when a
    source term is present.
    """

    def __init__(
        self,
        n: int,
        points: int,
        difference: Optional[np.ndarray] = None,
        gradient: Optional[np.ndarray] = None,
        beta1: float = 1.0,
        beta2: float = 1.0,
        shift: float = 0.0,
        kernel_tol: float = 1e-10,
    ):
        super().__init__()
        self.n = n
        d2 = n * n
        if difference is not None:
            lam_x, self.q_x = scipy.linalg.eigh(difference.T @ difference)
            lam_x = beta1 ** 2 * np.maximum(lam_x, 0.0)
        else:
            lam_x, self.q_x = np.zeros(points), np.eye(points)
        if gradient is not None:
            lam_l, self.q_l = scipy.linalg.eigh(gradient.T @ gradient)
            lam_l = beta2 ** 2 * np.maximum(lam_l, 0.0)
        else:
            lam_l, self.q_l = np.zeros(d2), np.eye(d2)
        eig = lam_x[:, None] + lam_l[None, :] + shift
        top = float(eig.max()) if eig.size else 0.0
        self.kernel_mask = eig <= kernel_tol * top if top > 0 else np.ones_like(eig, dtype=bool)
        self.inverse = np.where(self.kernel_mask, 0.0, 1.0 / np.where(self.kernel_mask, 1.0, eig))
        self.logger.debug(
            f"factorized Gram: {points} x {d2} modes, {int(self.kernel_mask.sum())} in the kernel"
        )

    def kernel_basis(self) -> np.ndarray:
        """Orthonormal kernel vectors as (k, points, n^2) real coordinates"""
        rows, cols = np.nonzero(self.kernel_mask)
        return np.einsum("pk,ak->kpa", self.q_x[:, rows], self.q_l[:, cols]) if rows.size else np.zeros(
            (0,) + self.kernel_mask.shape
        )

    def solve(self, r: np.ndarray) -> Tuple[np.ndarray, float]:
        coords = hermitian_to_real(np.asarray(r).reshape(-1, self.n, self.n))
        modal = self.q_x.T @ coords @ self.q_l
        kernel_norm = float(np.linalg.norm(modal[self.kernel_mask]))
        solved = self.q_x @ (modal * self.inverse) @ self.q_l.T
        return real_to_hermitian(solved, self.n).reshape(np.shape(r)), kernel_norm


class ConjugateGradientGram(GramSolver):
    """Matrix-free (A A^H)^+ by conjugate gradients on real coordinates

    A known orthonormal kernel basis (k, *codomain coords) is projected out of
    the right-hand side and the solution.
    """

    def __init__(
        self,
        operator: RealLinearOperator,
        kernel_basis: Optional[np.ndarray] = None,
        tol: float = 1e-12,
        max_iter: Optional[int] = None,
    ):
        super().__init__()
        self.operator = operator
        self.shape = tuple(operator.codomain_shape)
        self.n = self.shape[-1]
        self.coord_shape = self.shape[:-2] + (self.n * self.n,)
        self.dim = int(np.prod(self.coord_shape))
        basis = np.zeros((0, self.dim)) if kernel_basis is None else np.asarray(kernel_basis, dtype=float)
        self.kernel = basis.reshape(-1, self.dim)
        self.tol = tol
        self.max_iter = max_iter if max_iter is not None else 10 * self.dim
        self.linear_operator = LinearOperator((self.dim, self.dim), matvec=self._matvec, dtype=float)

    def _to_matrix(self, v: np.ndarray) -> np.ndarray:
        return real_to_hermitian(v.reshape(self.coord_shape), self.n)

    def _to_coords(self, m: np.ndarray) -> np.ndarray:
        return hermitian_to_real(m).reshape(-1)

    def _matvec(self, v: np.ndarray) -> np.ndarray:
        m = self._to_matrix(np.ravel(v))
        return self._to_coords(self.operator.apply(self.operator.adjoint(m)))

    def _deflate(self, v: np.ndarray) -> np.ndarray:
        if self.kernel.shape[0] == 0:
            return v
        return v - self.kernel.T @ (self.kernel @ v)

    def solve(self, r: np.ndarray) -> Tuple[np.ndarray, float]:
        coords = self._to_coords(np.asarray(r, dtype=complex).reshape(self.shape))
        kernel_norm = float(np.linalg.norm(self.kernel @ coords)) if self.kernel.shape[0] else 0.0
        rhs = self._deflate(coords)
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm == 0.0:
            return np.zeros(self.shape, dtype=complex), kernel_norm
        x, info = cg(self.linear_operator, rhs, rtol=self.tol, atol=0.0, maxiter=self.max_iter)
        x = self._deflate(x)
        if info != 0:
            relres = float(np.linalg.norm(self._matvec(x) - rhs)) / rhs_norm
            if info < 0 or relres > 1e-6:
                raise SingularConstraint(
                    f"conjugate gradients stalled (info={info}, relative residual {relres:.3e}); "
                    "check the kernel condition and the right-hand side"
                )
            self.logger.debug(f"CG stopped at {self.max_iter} iterations, relative residual {relres:.3e}")
        return self._to_matrix(x).reshape(self.shape), kernel_norm


@dataclass(frozen=True)
class AffineSet:
    """{w : w in the domain of A, A w = b}; project_domain pins entries A never reads"""
    operator: RealLinearOperator
    rhs: np.ndarray
    gram: GramSolver

    def __post_init__(self):
        rhs = np.asarray(self.rhs, dtype=complex)
        if rhs.shape != tuple(self.operator.codomain_shape):
            raise ShapeMismatch(f"rhs shape {rhs.shape} does not match codomain {self.operator.codomain_shape}")
        object.__setattr__(self, "rhs", rhs)

    def with_rhs(self, rhs: np.ndarray) -> "AffineSet":
        return replace(self, rhs=rhs)

    def residual(self, w: np.ndarray) -> float:
        """||A w - b|| / max(||b||, 1e-300)"""
        return float(np.linalg.norm(self.operator.apply(w) - self.rhs)) / max(float(np.linalg.norm(self.rhs)), 1e-300)


def project_affine(z: np.ndarray, S: AffineSet, check: bool = True) -> np.ndarray:
    """Euclidean projection of z onto the affine set S

    The domain projection comes first; A^H maps into that domain so the
    correction w - A^H (A A^H)^+ (A w - b) stays in it.
    """
    w = S.operator.project_domain(np.asarray(z, dtype=complex))
    aw = S.operator.apply(w)
    y, kernel_norm = S.gram.solve(aw - S.rhs)
    if check:
        bound = KERNEL_RESIDUAL_TOL * (float(np.linalg.norm(aw)) + float(np.linalg.norm(S.rhs)))
        if kernel_norm > max(bound, 1e-300):
            raise SingularConstraint(
                f"right-hand side has a component {kernel_norm:.3e} outside the range of the constraint"
            )
    return w - S.operator.adjoint(y)
