"""
Problem assembly and the Douglas-Rachford solver with duality-gap certificates

Every problem kind is solved in the common form

    minimize    sum_p  q ( ||T_p||_* + alpha ||S_p||_* )
    subject to  -beta1 div_x u1 + beta2 div_L u2 + v = rho0 - rho1

where p runs over grid points (a single point for matrix kinds), T_p stacks
the spatial block u1(p) over the commutator blocks u2(p), S_p = v(p) and q is
the quadrature weight (h for fields, 1 for matrices).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from .config import SolverConfig
from .core import (
    BlockVector,
    HermitianMatrix,
    StructureTag,
    hermitian_part,
    hermitian_to_real,
    make_density,
    real_inner,
    real_to_hermitian,
    skew_part,
)
from .errors import KernelViolation, ParameterError, ShapeMismatch, TraceMismatch
from .operators import (
    Grid1D,
    LFamily,
    MatrixField,
    RealLinearOperator,
    as_lfamily,
    backward_difference,
    commutator_div,
    commutator_grad,
    forward_difference,
    op_norm_estimate,
)
from .prox import AffineSet, ConjugateGradientGram, FactorizedGram, GramSolver, group_svt, project_affine


logger = logging.getLogger(__name__)

TRACE_TOL = 1e-9
KERNEL_COMPONENT_TOL = 1e-9
DEGENERATE_TOL = 1e-14
OP_NORM_SAFETY = 1.05


class ProblemKind(Enum):
    BALANCED_MATRIX = "balanced_matrix"
    UNBALANCED_MATRIX = "unbalanced_matrix"
    BALANCED_FIELD = "balanced_field"
    UNBALANCED_FIELD = "unbalanced_field"

    @property
    def is_field(self) -> bool:
        return self in (ProblemKind.BALANCED_FIELD, ProblemKind.UNBALANCED_FIELD)

    @property
    def is_balanced(self) -> bool:
        return self in (ProblemKind.BALANCED_MATRIX, ProblemKind.BALANCED_FIELD)


@dataclass(frozen=True)
class FluxLayout:
    """Slot layout of the flux array (points, slots, n, n)

    Slots: the spatial block (fields), then one block per L_k, then the
    source block (unbalanced kinds). Blocks are general complex matrices;
    the constraint only sees their Hermitian (spatial, source) or skew
    (commutator) parts, as listed by tags(). On zero-flux grids the spatial
    block of the last point has no edge and is pinned to zero.
    """
    points: int
    n: int
    has_x: bool
    n_l: int
    has_source: bool
    zero_last_x: bool = False

    @property
    def transport_count(self) -> int:
        return int(self.has_x) + self.n_l

    @property
    def slots(self) -> int:
        return self.transport_count + int(self.has_source)

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.points, self.slots, self.n, self.n)

    @property
    def l_slice(self) -> slice:
        start = int(self.has_x)
        return slice(start, start + self.n_l)

    @property
    def source_slot(self) -> Optional[int]:
        return self.transport_count if self.has_source else None

    def tags(self) -> Tuple[StructureTag, ...]:
        tags = [StructureTag.HERMITIAN] if self.has_x else []
        tags += [StructureTag.SKEW] * self.n_l
        if self.has_source:
            tags.append(StructureTag.HERMITIAN)
        return tuple(tags)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def project_structure(self, w: np.ndarray) -> np.ndarray:
        """Pin the spatial block that has no edge; every other block is free"""
        if not self.zero_last_x:
            return w
        out = w.copy()
        out[-1, 0] = 0.0
        return out

    def transport_stack(self, w: np.ndarray) -> np.ndarray:
        """(points, transport_count * n, n) stacked transport groups"""
        return w[:, : self.transport_count].reshape(self.points, self.transport_count * self.n, self.n)

    def source(self, w: np.ndarray) -> Optional[np.ndarray]:
        return w[:, self.source_slot] if self.has_source else None


class FluxConstraint(RealLinearOperator):
    """A(u1, u2, v) = -beta1 div_x herm(u1) + beta2 div_L skew(u2) + herm(v)

    The adjoint lands in the structured blocks, so A A^H is the Gram of the
    structured operator and the nuclear norm dual is measured on grad f.
    """

    def __init__(
        self,
        layout: FluxLayout,
        L: Optional[LFamily] = None,
        grid: Optional[Grid1D] = None,
        beta1: float = 1.0,
        beta2: float = 1.0,
    ):
        super().__init__()
        self.layout = layout
        self.L = L
        self.grid = grid
        self.beta1 = beta1
        self.beta2 = beta2
        if layout.has_x and grid is None:
            raise ParameterError("a spatial flux needs a grid")
        if layout.n_l and L is None:
            raise ParameterError("commutator blocks need an L family")

    @property
    def domain_shape(self) -> Tuple[int, ...]:
        return self.layout.shape

    @property
    def codomain_shape(self) -> Tuple[int, ...]:
        return (self.layout.points, self.layout.n, self.layout.n)

    def apply(self, w: np.ndarray) -> np.ndarray:
        lay = self.layout
        out = np.zeros(self.codomain_shape, dtype=complex)
        if lay.has_x:
            edges = hermitian_part(w[: self.grid.edge_count, 0])
            out -= self.beta1 * backward_difference(edges, self.grid)
        if lay.n_l:
            out += self.beta2 * commutator_div(self.L.matrices, skew_part(w[:, lay.l_slice]))
        if lay.has_source:
            out += hermitian_part(w[:, lay.source_slot])
        return out

    def adjoint(self, f: np.ndarray) -> np.ndarray:
        lay = self.layout
        w = lay.zeros()
        if lay.has_x:
            w[: self.grid.edge_count, 0] = self.beta1 * forward_difference(f, self.grid)
        if lay.n_l:
            w[:, lay.l_slice] = self.beta2 * commutator_grad(self.L.matrices, f)
        if lay.has_source:
            w[:, lay.source_slot] = f
        return w

    def project_domain(self, w: np.ndarray) -> np.ndarray:
        return self.layout.project_structure(w)


@dataclass(frozen=True)
class Flux:
    """An optimal flux in the problem's layout"""
    layout: FluxLayout
    array: np.ndarray = field(repr=False)

    @property
    def transport(self) -> np.ndarray:
        """(points, transport_count, n, n)"""
        return self.array[:, : self.layout.transport_count]

    @property
    def u1(self) -> Optional[np.ndarray]:
        return self.array[:, 0] if self.layout.has_x else None

    @property
    def u2(self) -> np.ndarray:
        return self.array[:, self.layout.l_slice]

    @property
    def u(self) -> BlockVector:
        """Commutator blocks of a matrix-kind flux; they carry the cost"""
        return BlockVector(self.array[0, self.layout.l_slice], (StructureTag.GENERAL,) * self.layout.n_l)

    @property
    def skew_u(self) -> BlockVector:
        """Skew parts of u, the blocks div_L acts on"""
        return BlockVector(skew_part(self.array[0, self.layout.l_slice]), (StructureTag.SKEW,) * self.layout.n_l)

    @property
    def v(self) -> Optional[np.ndarray]:
        src = self.layout.source(self.array)
        if src is None:
            return None
        src = hermitian_part(src)
        return src if self.layout.points > 1 else src[0]


@dataclass(frozen=True)
class ProblemSpec:
    """An assembled primal problem"""
    kind: ProblemKind
    layout: FluxLayout
    affine: AffineSet
    difference: np.ndarray = field(repr=False)  # rho0 - rho1 per point
    rho0: np.ndarray = field(repr=False)
    rho1: np.ndarray = field(repr=False)
    L: Optional[LFamily] = None
    grid: Optional[Grid1D] = None
    alpha: Optional[float] = None
    beta1: float = 1.0
    beta2: float = 1.0
    quadrature: float = 1.0
    op_norm: float = 0.0

    @property
    def operator(self) -> FluxConstraint:
        return self.affine.operator

    @property
    def rhs(self) -> np.ndarray:
        return self.affine.rhs

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def group_count(self) -> int:
        points = self.layout.points
        return points * (int(self.layout.transport_count > 0) + int(self.layout.has_source))

    @property
    def group_weights(self) -> np.ndarray:
        """Objective weight of each group: transport groups first, then source groups"""
        points = self.layout.points
        weights = []
        if self.layout.transport_count:
            weights.append(np.full(points, self.quadrature))
        if self.layout.has_source:
            weights.append(np.full(points, self.alpha * self.quadrature))
        return np.concatenate(weights) if weights else np.zeros(0)

    @property
    def codomain_dim(self) -> int:
        return self.layout.points * self.layout.n ** 2


@dataclass
class DRState:
    """Douglas-Rachford iterate on the normalized problem"""
    z: np.ndarray = field(repr=False)
    scale: float
    gamma: float
    iterations: int = 0


@dataclass
class Certificate:
    """Primal value, feasible dual potential and the duality gap between them"""
    primal_value: float
    dual_value: float
    gap: float
    flux: Flux
    potential: Union[HermitianMatrix, MatrixField]
    residual: float
    iterations: int
    converged: bool
    fixed_point_residual: float = 0.0
    potential_constraint: float = 0.0
    problem: Optional[ProblemSpec] = field(default=None, repr=False)
    state: Optional[DRState] = field(default=None, repr=False)

    @property
    def value(self) -> float:
        return self.primal_value

    @property
    def relative_gap(self) -> float:
        return self.gap / max(1.0, abs(self.primal_value))


# --- assembly --------------------------------------------------------------


def _matrix_input(rho) -> np.ndarray:
    if isinstance(rho, MatrixField):
        raise ShapeMismatch("matrix kinds take single matrices, not fields")
    return np.array(make_density(rho).entries)[None]


def _field_input(rho, grid: Optional[Grid1D]) -> Tuple[np.ndarray, Grid1D]:
    if isinstance(rho, MatrixField):
        if grid is not None and grid != rho.grid:
            raise ShapeMismatch(f"field grid {rho.grid} differs from {grid}")
        return np.array(rho.check_density().values), rho.grid
    if grid is None:
        raise ParameterError("field kinds need a grid")
    return np.array(MatrixField(grid, rho).check_density().values), grid


def _positive(name: str, value: Optional[float], default: Optional[float]) -> Optional[float]:
    value = default if value is None else value
    if value is not None and not value > 0:
        raise ParameterError(f"{name} must be positive, got {value}")
    return None if value is None else float(value)


def codomain_kernel(layout: FluxLayout, L: Optional[LFamily]) -> np.ndarray:
    """Orthonormal basis (k, points, n^2) of the kernel of A A^H for source-free layouts"""
    d2 = layout.n ** 2
    if layout.has_source:
        return np.zeros((0, layout.points, d2))
    local = L.kernel.basis if layout.n_l else np.eye(d2)
    if layout.has_x:
        constant = np.full(layout.points, 1.0 / np.sqrt(layout.points))
        return np.einsum("p,ka->kpa", constant, local)
    return local[:, None, :]


def _make_gram(
    operator: FluxConstraint, layout: FluxLayout, kernel: np.ndarray, config: SolverConfig
) -> GramSolver:
    strategy = config.projection
    if strategy == "auto":
        small = layout.points <= config.dense_max_dim and layout.n ** 2 <= config.dense_max_dim
        strategy = "factorized" if small else "cg"
    if strategy == "factorized":
        return FactorizedGram(
            layout.n,
            layout.points,
            difference=operator.grid.difference_matrix() if layout.has_x else None,
            gradient=operator.L.gradient_matrix if layout.n_l else None,
            beta1=operator.beta1,
            beta2=operator.beta2,
            shift=1.0 if layout.has_source else 0.0,
            kernel_tol=config.kernel_tol,
        )
    return ConjugateGradientGram(operator, kernel, tol=config.cg_tol, max_iter=config.cg_max_iter)


def _remove_kernel_component(
    b: np.ndarray, kernel: np.ndarray, layout: FluxLayout
) -> np.ndarray:
    """Drop b's kernel component; raise if it has one beyond the identity direction"""
    if kernel.shape[0] == 0:
        return b
    coords = hermitian_to_real(b).reshape(-1)
    flat = kernel.reshape(kernel.shape[0], -1)
    component = flat.T @ (flat @ coords)
    identity = np.tile(hermitian_to_real(np.eye(layout.n)), layout.points).reshape(-1)
    identity /= np.linalg.norm(identity)
    extra = component - identity * float(identity @ component)
    extra_norm = float(np.linalg.norm(extra))
    if extra_norm > KERNEL_COMPONENT_TOL * float(np.linalg.norm(coords)):
        raise KernelViolation(
            f"rho0 - rho1 has a component {extra_norm:.3e} in the kernel of grad_L beyond the identity; "
            "no flux can balance it"
        )
    if kernel.shape[0] > 1:
        logger.warning(
            f"grad_L kernel has dimension {kernel.shape[0]}; rho0 - rho1 is orthogonal to it, continuing"
        )
    return b - real_to_hermitian(component.reshape(layout.points, -1), layout.n)


def assemble(
    kind,
    rho0,
    rho1,
    L=None,
    grid: Optional[Grid1D] = None,
    alpha: Optional[float] = None,
    beta1: Optional[float] = None,
    beta2: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> ProblemSpec:
    """Build the constraint operator, right-hand side and objective groups for one problem kind"""
    config = config or SolverConfig()
    kind = ProblemKind(kind)

    if kind.is_field:
        r0, grid = _field_input(rho0, grid)
        r1, _ = _field_input(rho1, grid)
        beta1 = _positive("beta1", beta1, 1.0)
        beta2 = _positive("beta2", beta2, 1.0)
    else:
        r0, r1 = _matrix_input(rho0), _matrix_input(rho1)
        grid = None
        beta1, beta2 = 1.0, 1.0
    if r0.shape != r1.shape:
        raise ShapeMismatch(f"rho0 has shape {r0.shape[1:]}, rho1 has shape {r1.shape[1:]}")
    n = r0.shape[-1]

    if kind.is_balanced:
        alpha = None
    else:
        alpha = _positive("alpha", alpha, None)
        if alpha is None:
            raise ParameterError("unbalanced problems need alpha > 0")

    use_L = n > 1
    family = None
    if use_L:
        if L is None:
            raise ParameterError(f"an L family is required for n = {n}")
        family = as_lfamily(L, config.kernel_tol)
        if family.n != n:
            raise ShapeMismatch(f"L acts on {family.n} x {family.n}, densities are {n} x {n}")
        if not kind.is_balanced and not family.kernel.passed:
            logger.warning(f"kernel condition fails (nullity {family.kernel.nullity}); the source term keeps A onto")

    quadrature = grid.h if kind.is_field else 1.0
    if kind.is_balanced:
        t0 = quadrature * float(np.real(np.trace(r0, axis1=1, axis2=2)).sum())
        t1 = quadrature * float(np.real(np.trace(r1, axis1=1, axis2=2)).sum())
        if abs(t0 - t1) > TRACE_TOL * max(abs(t0), abs(t1), 1e-300):
            raise TraceMismatch(
                f"total traces differ ({t0:.12g} vs {t1:.12g}); use the unbalanced distance (v1) instead"
            )

    layout = FluxLayout(
        points=r0.shape[0],
        n=n,
        has_x=kind.is_field,
        n_l=family.N if use_L else 0,
        has_source=not kind.is_balanced,
        zero_last_x=kind.is_field and not grid.periodic,
    )
    operator = FluxConstraint(layout, family, grid, beta1, beta2)
    difference = r0 - r1
    kernel = codomain_kernel(layout, family)
    rhs = _remove_kernel_component(difference, kernel, layout)
    gram = _make_gram(operator, layout, kernel, config)
    op_norm = OP_NORM_SAFETY * op_norm_estimate(operator, seed=config.seed)

    logger.info(
        f"assembled {kind.value}: {layout.points} point(s), n={n}, "
        f"{layout.transport_count} transport block(s), source={layout.has_source}, "
        f"gram={type(gram).__name__}, ||A|| <= {op_norm:.4g}"
    )
    return ProblemSpec(
        kind=kind,
        layout=layout,
        affine=AffineSet(operator, rhs, gram),
        difference=difference,
        rho0=r0,
        rho1=r1,
        L=family,
        grid=grid,
        alpha=alpha,
        beta1=beta1,
        beta2=beta2,
        quadrature=quadrature,
        op_norm=op_norm,
    )


# --- Douglas-Rachford ------------------------------------------------------


def _prox(z: np.ndarray, layout: FluxLayout, gamma: float, alpha: float) -> np.ndarray:
    out = np.zeros_like(z)
    points, kt = layout.points, layout.transport_count
    if kt:
        shrunk = group_svt(layout.transport_stack(z), np.full(points, gamma))
        out[:, :kt] = shrunk.reshape(points, kt, layout.n, layout.n)
    if layout.has_source:
        out[:, layout.source_slot] = group_svt(z[:, layout.source_slot], np.full(points, gamma * alpha))
    return out


def _objective(w: np.ndarray, layout: FluxLayout, alpha: float) -> float:
    total = 0.0
    if layout.transport_count:
        total += float(np.sum(np.linalg.svd(layout.transport_stack(w), compute_uv=False)))
    if layout.has_source:
        total += alpha * float(np.sum(np.linalg.svd(w[:, layout.source_slot], compute_uv=False)))
    return total


def _max_ratio(w: np.ndarray, layout: FluxLayout, alpha: float) -> float:
    """max over groups of ||w_p|| / group weight (operator norms)"""
    ratios = [0.0]
    if layout.transport_count:
        ratios.append(float(np.max(np.linalg.norm(layout.transport_stack(w), ord=2, axis=(1, 2)))))
    if layout.has_source:
        ratios.append(float(np.max(np.linalg.norm(w[:, layout.source_slot], ord=2, axis=(1, 2)))) / alpha)
    return max(ratios)


def _point_nuclear(b: np.ndarray) -> np.ndarray:
    return np.sum(np.linalg.svd(b, compute_uv=False), axis=-1)


def _dual_estimate(
    layout: FluxLayout, affine: AffineSet, z: np.ndarray, x: np.ndarray, gamma: float, alpha: float
) -> Tuple[np.ndarray, float, float]:
    """Feasible potential from the DR multiplier (z - x)/gamma

    f solves A A^H f = A g and is rescaled by max(1, max group ||A^H f||),
    so ||grad f|| <= 1 holds at every point and <f, b> is a lower bound.
    """
    g = layout.project_structure((z - x) / gamma)
    op = affine.operator
    f, _ = affine.gram.solve(op.apply(g))
    ratio = _max_ratio(op.adjoint(f), layout, alpha)
    s = max(1.0, ratio)
    f = f / s
    return f, real_inner(f, affine.rhs), ratio / s


def _wrap_potential(problem: ProblemSpec, f: np.ndarray):
    f = hermitian_part(f)
    if problem.kind.is_field:
        return MatrixField(problem.grid, f)
    return HermitianMatrix(f[0])


def _zero_certificate(problem: ProblemSpec) -> Certificate:
    layout = problem.layout
    f = np.zeros((layout.points, layout.n, layout.n), dtype=complex)
    return Certificate(
        primal_value=0.0,
        dual_value=0.0,
        gap=0.0,
        flux=Flux(layout, layout.zeros()),
        potential=_wrap_potential(problem, f),
        residual=0.0,
        iterations=0,
        converged=True,
        problem=problem,
    )


def _initial_gamma(problem: ProblemSpec, affine: AffineSet, config: SolverConfig) -> float:
    """dr_gamma times the per-group size of the least-norm feasible flux"""
    w0 = project_affine(problem.layout.zeros(), affine)
    size = float(np.linalg.norm(w0)) / np.sqrt(problem.group_count)
    return config.dr_gamma * (size if size > 0 else 1.0)


def _initial_point(
    problem: ProblemSpec, affine: AffineSet, config: SolverConfig, warm_start, scale: float
) -> Tuple[np.ndarray, float]:
    layout = problem.layout
    state = warm_start.state if isinstance(warm_start, Certificate) else warm_start
    if state is not None and state.z.shape != layout.shape:
        logger.warning(f"warm start has shape {state.z.shape}, problem needs {layout.shape}; starting from 0")
        state = None
    if state is None:
        return layout.zeros(), _initial_gamma(problem, affine, config)
    ratio = state.scale / scale
    return state.z * ratio, state.gamma * ratio


def _rebalanced(gamma: float, primal_res: float, dual_res: float, config: SolverConfig) -> float:
    """Residual balancing: shrink gamma when the split points disagree, grow it when y stalls"""
    if primal_res > config.gamma_balance * dual_res:
        return gamma / config.gamma_factor
    if dual_res > config.gamma_balance * primal_res:
        return gamma * config.gamma_factor
    return gamma


def constraint_residual(problem: ProblemSpec, flux) -> float:
    """||A flux - b|| / ||b|| for a flux array or Flux"""
    w = flux.array if isinstance(flux, Flux) else np.asarray(flux, dtype=complex)
    if w.shape != problem.layout.shape:
        raise ShapeMismatch(f"flux has shape {w.shape}, problem needs {problem.layout.shape}")
    b = problem.rhs
    b_norm = float(np.linalg.norm(b))
    r = float(np.linalg.norm(problem.operator.apply(w) - b))
    return r / b_norm if b_norm > 0 else r


def solve(
    problem: ProblemSpec, config: Optional[SolverConfig] = None, warm_start=None
) -> Certificate:
    """Douglas-Rachford between group SVT and the affine projection, certified by a feasible dual"""
    config = config or SolverConfig()
    layout = problem.layout
    if max(float(np.linalg.norm(problem.difference)), float(np.linalg.norm(problem.rhs))) <= DEGENERATE_TOL:
        logger.info("rho0 == rho1: returning the zero certificate")
        return _zero_certificate(problem)

    scale = float(np.mean(_point_nuclear(problem.rhs)))
    affine = problem.affine.with_rhs(problem.rhs / scale)
    unit = problem.quadrature * scale
    alpha = problem.alpha if problem.alpha is not None else 1.0

    z, gamma = _initial_point(problem, affine, config, warm_start, scale)
    best_primal, best_w = np.inf, None
    best_dual, best_f, best_ratio = -np.inf, None, 0.0
    fixed_point = np.inf
    primal_res = dual_res = 0.0
    y_prev = None
    converged = False
    iterations = 0

    for it in range(1, config.max_iter + 1):
        iterations = it
        x = _prox(z, layout, gamma, alpha)
        if it == 1 or it % config.check_every == 0 or it == config.max_iter:
            w = project_affine(x, affine)
            primal = _objective(w, layout, alpha)
            fixed_point = float(np.linalg.norm(x - w)) / (1.0 + float(np.linalg.norm(x)))
            f, dual, ratio = _dual_estimate(layout, affine, z, x, gamma, alpha)
            if primal < best_primal:
                best_primal, best_w = primal, w
            if dual > best_dual:
                best_dual, best_f, best_ratio = dual, f, ratio
            gap = unit * (best_primal - best_dual)
            residual = affine.residual(best_w)
            logger.debug(
                f"iter {it}: primal={unit * best_primal:.10g} dual={unit * best_dual:.10g} "
                f"gap={gap:.3e} fixed-point={fixed_point:.3e} gamma={gamma:.3e}"
            )
            if gap <= config.tol_gap * max(1.0, unit * best_primal) and residual <= config.tol_residual:
                converged = True
                break
            if fixed_point <= config.tol_residual:
                break
            if 1 < it <= config.gamma_adapt_until:
                new_gamma = _rebalanced(gamma, primal_res, dual_res, config)
                if new_gamma != gamma:
                    # same x and multiplier, new threshold
                    z = x + (new_gamma / gamma) * (z - x)
                    gamma = new_gamma
        y = project_affine(2.0 * x - z, affine)
        primal_res = float(np.linalg.norm(x - y))
        dual_res = float(np.linalg.norm(y - y_prev)) / gamma if y_prev is not None else 0.0
        y_prev = y
        z = z + config.dr_relaxation * (y - x)

    primal_value = unit * best_primal
    dual_value = unit * best_dual
    flux = Flux(layout, best_w * scale)
    certificate = Certificate(
        primal_value=primal_value,
        dual_value=dual_value,
        gap=primal_value - dual_value,
        flux=flux,
        potential=_wrap_potential(problem, best_f),
        residual=constraint_residual(problem, flux),
        iterations=iterations,
        converged=converged,
        fixed_point_residual=fixed_point,
        potential_constraint=best_ratio,
        problem=problem,
        state=DRState(z=z, scale=scale, gamma=gamma, iterations=iterations),
    )
    if converged:
        logger.info(
            f"{problem.kind.value} converged in {iterations} iterations: "
            f"value={primal_value:.10g}, gap={certificate.gap:.3e}"
        )
    else:
        logger.warning(
            f"{problem.kind.value} stopped after {iterations} iterations without certificate: "
            f"value={primal_value:.10g}, gap={certificate.gap:.3e}, fixed-point={fixed_point:.3e}"
        )
    return certificate


def recover_dual(problem: ProblemSpec, state: DRState):
    """Feasible potential and dual value from a (finished or running) Douglas-Rachford state"""
    alpha = problem.alpha if problem.alpha is not None else 1.0
    affine = problem.affine.with_rhs(problem.rhs / state.scale)
    x = _prox(state.z, problem.layout, state.gamma, alpha)
    f, dual, _ = _dual_estimate(problem.layout, affine, state.z, x, state.gamma, alpha)
    return _wrap_potential(problem, f), problem.quadrature * state.scale * dual
