"""
W1 / V1 distances between density matrices and matrix fields, and the metric-axiom audit
"""

import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .config import SolverConfig
from .core import BlockVector, make_density, nuclear_norm, random_density
from .errors import NotConverged, ParameterError
from .operators import Grid1D, MatrixField, as_lfamily
from .solver import Certificate, ProblemKind, assemble, solve


logger = logging.getLogger(__name__)


def w1(rho0, rho1, L, config: Optional[SolverConfig] = None, warm_start=None) -> Certificate:
    """Balanced matricial W1; raises TraceMismatch for unequal traces (use v1)"""
    config = config or SolverConfig()
    problem = assemble(ProblemKind.BALANCED_MATRIX, rho0, rho1, L, config=config)
    return solve(problem, config, warm_start)


def v1(rho0, rho1, L, alpha: float, config: Optional[SolverConfig] = None, warm_start=None) -> Certificate:
    """Unbalanced W1 with a source term weighted by alpha"""
    config = config or SolverConfig()
    problem = assemble(ProblemKind.UNBALANCED_MATRIX, rho0, rho1, L, alpha=alpha, config=config)
    return solve(problem, config, warm_start)


def field_w1(
    rho0: MatrixField,
    rho1: MatrixField,
    L=None,
    beta1: float = 1.0,
    beta2: float = 1.0,
    config: Optional[SolverConfig] = None,
    warm_start=None,
) -> Certificate:
    config = config or SolverConfig()
    problem = assemble(ProblemKind.BALANCED_FIELD, rho0, rho1, L, beta1=beta1, beta2=beta2, config=config)
    return solve(problem, config, warm_start)


def field_v1(
    rho0: MatrixField,
    rho1: MatrixField,
    L=None,
    alpha: float = 1.0,
    beta1: float = 1.0,
    beta2: float = 1.0,
    config: Optional[SolverConfig] = None,
    warm_start=None,
) -> Certificate:
    config = config or SolverConfig()
    problem = assemble(
        ProblemKind.UNBALANCED_FIELD, rho0, rho1, L, alpha=alpha, beta1=beta1, beta2=beta2, config=config
    )
    return solve(problem, config, warm_start)


def scalar_w1(p0: Sequence[float], p1: Sequence[float], grid: Grid1D, config: Optional[SolverConfig] = None) -> Certificate:
    """field_w1 on n = 1 densities: the scalar flux formulation of W1"""
    return field_w1(MatrixField.from_scalars(grid, p0), MatrixField.from_scalars(grid, p1), config=config)


class Decomposition(NamedTuple):
    mu: np.ndarray
    nu: np.ndarray
    u: BlockVector


def decompose_v1(certificate: Certificate) -> Decomposition:
    """Equal-trace pair (mu, nu) and flux u reproducing an unbalanced certificate

    With v = v1 - v0 split into its positive and negative parts,
    mu = rho0 + v0 and nu = rho1 + v1.
    """
    problem = certificate.problem
    if problem is None or problem.kind is not ProblemKind.UNBALANCED_MATRIX:
        raise ParameterError("decompose_v1 needs an unbalanced_matrix certificate")
    if not certificate.converged:
        raise NotConverged(
            f"certificate did not converge (gap {certificate.gap:.3e} after {certificate.iterations} iterations)"
        )
    v = certificate.flux.v
    lam, vecs = np.linalg.eigh(v)
    positive = (vecs * np.maximum(lam, 0.0)) @ vecs.conj().T
    negative = (vecs * np.maximum(-lam, 0.0)) @ vecs.conj().T
    mu = problem.rho0[0] + negative
    nu = problem.rho1[0] + positive
    return Decomposition(mu=mu, nu=nu, u=certificate.flux.u)


def decomposition_objective(
    mu: np.ndarray, nu: np.ndarray, u: BlockVector, rho0, rho1, alpha: float
) -> float:
    """||u||_* + alpha ||rho0 - mu||_* + alpha ||rho1 - nu||_*"""
    r0 = np.asarray(make_density(rho0).entries)
    r1 = np.asarray(make_density(rho1).entries)
    flux_cost = nuclear_norm(u) if len(u) else 0.0
    return flux_cost + alpha * nuclear_norm(r0 - mu) + alpha * nuclear_norm(r1 - nu)


# --- batches ---------------------------------------------------------------


Distance = Callable[[Any, Any, SolverConfig], Certificate]


class PairwiseDistances(NamedTuple):
    values: np.ndarray
    certificates: Dict[Tuple[int, int], Certificate]
    failures: Dict[Tuple[int, int], str]


def run_jobs(jobs: Dict[Any, Callable[[], Certificate]], workers: int) -> Tuple[Dict, Dict]:
    """Run independent solves; one failing job is logged and reported, not fatal"""
    results, failures = {}, {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(job): key for key, job in jobs.items()}
        for future in as_completed(futures):
            key = futures[future]
            try:
                results[key] = future.result()
            except Exception as e:
                logger.error(f"job {key} failed: {e}")
                failures[key] = f"{type(e).__name__}: {e}"
    return results, failures


def pairwise_distances(
    items: Sequence[Any], distance: Distance, config: Optional[SolverConfig] = None
) -> PairwiseDistances:
    """Symmetric matrix of distance values over all pairs i < j"""
    config = config or SolverConfig()
    count = len(items)
    jobs = {
        (i, j): (lambda a=items[i], b=items[j]: distance(a, b, config))
        for i in range(count)
        for j in range(i + 1, count)
    }
    results, failures = run_jobs(jobs, config.workers)
    values = np.zeros((count, count))
    for (i, j), cert in results.items():
        values[i, j] = values[j, i] = cert.value
    for i, j in failures:
        values[i, j] = values[j, i] = np.nan
    return PairwiseDistances(values, results, failures)


# --- metric audit ----------------------------------------------------------


class TripleSampler(ABC):
    """Seeded random triples plus the distance they are audited under"""

    @abstractmethod
    def draw(self, rng: np.random.Generator) -> Tuple[Any, Any, Any]:
        pass

    @abstractmethod
    def distance(self, a, b, config: SolverConfig) -> Certificate:
        pass


class DensityTripleSampler(TripleSampler):
    """Random density matrices under w1 (alpha None) or v1 (traces drawn in [0.5, 2])"""

    def __init__(self, n: int, L, alpha: Optional[float] = None):
        self.n = n
        self.L = as_lfamily(L)
        self.alpha = alpha

    def draw(self, rng: np.random.Generator):
        if self.alpha is None:
            return tuple(random_density(self.n, rng) for _ in range(3))
        return tuple(random_density(self.n, rng, trace=rng.uniform(0.5, 2.0)) for _ in range(3))

    def distance(self, a, b, config: SolverConfig) -> Certificate:
        if self.alpha is None:
            return w1(a, b, self.L, config)
        return v1(a, b, self.L, self.alpha, config)


class FieldTripleSampler(TripleSampler):
    """Random matrix fields of equal total trace under field_w1, or free traces under field_v1"""

    def __init__(
        self,
        grid: Grid1D,
        n: int = 1,
        L=None,
        alpha: Optional[float] = None,
        beta1: float = 1.0,
        beta2: float = 1.0,
    ):
        self.grid = grid
        self.n = n
        self.L = as_lfamily(L) if L is not None and n > 1 else None
        self.alpha = alpha
        self.beta1 = beta1
        self.beta2 = beta2

    def _field(self, rng: np.random.Generator) -> MatrixField:
        weights = rng.uniform(0.0, 1.0, self.grid.M)
        if self.alpha is None:
            weights /= self.grid.h * weights.sum()
        values = np.array([random_density(self.n, rng, trace=t) for t in weights])
        return MatrixField(self.grid, values)

    def draw(self, rng: np.random.Generator):
        return tuple(self._field(rng) for _ in range(3))

    def distance(self, a, b, config: SolverConfig) -> Certificate:
        if self.alpha is None:
            return field_w1(a, b, self.L, self.beta1, self.beta2, config)
        return field_v1(a, b, self.L, self.alpha, self.beta1, self.beta2, config)


@dataclass(frozen=True)
class AuditViolation:
    axiom: str
    triple: int
    excess: float
    detail: str


@dataclass
class AuditReport:
    count: int
    violations: List[AuditViolation] = field(default_factory=list)
    worst: Dict[str, float] = field(default_factory=dict)
    failures: Dict[int, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.failures


def _audit_triple(sampler: TripleSampler, triple, config: SolverConfig) -> Dict[str, float]:
    a, b, c = triple
    d = {
        "ab": sampler.distance(a, b, config).value,
        "ba": sampler.distance(b, a, config).value,
        "aa": sampler.distance(a, a, config).value,
        "bc": sampler.distance(b, c, config).value,
        "ac": sampler.distance(a, c, config).value,
    }
    return d


def metric_audit(sampler: TripleSampler, count: int, config: Optional[SolverConfig] = None) -> AuditReport:
    """Symmetry, identity and triangle inequality on `count` seeded random triples"""
    config = config or SolverConfig()
    report = AuditReport(count=count, worst={"symmetry": 0.0, "identity": 0.0, "triangle": 0.0})
    if count <= 0:
        return report
    rng = np.random.default_rng(config.seed)
    triples = [sampler.draw(rng) for _ in range(count)]
    jobs = {k: (lambda t=t: _audit_triple(sampler, t, config)) for k, t in enumerate(triples)}
    results, failures = run_jobs(jobs, config.workers)
    report.failures.update(failures)

    tol = config.tol_gap
    for k in sorted(results):
        d = results[k]
        scale = max(1.0, *d.values())
        checks = {
            "symmetry": (abs(d["ab"] - d["ba"]), 2 * tol * scale, f"d(a,b)={d['ab']:.10g} d(b,a)={d['ba']:.10g}"),
            "identity": (d["aa"], tol * scale, f"d(a,a)={d['aa']:.3e}"),
            "triangle": (
                d["ac"] - d["ab"] - d["bc"],
                3 * tol * scale,
                f"d(a,c)={d['ac']:.10g} > d(a,b)+d(b,c)={d['ab'] + d['bc']:.10g}",
            ),
        }
        for axiom, (amount, allowed, detail) in checks.items():
            report.worst[axiom] = max(report.worst[axiom], amount)
            if amount > allowed:
                report.violations.append(AuditViolation(axiom, k, amount - allowed, detail))
    if report.violations:
        logger.warning(f"metric audit: {len(report.violations)} violation(s) in {count} triples")
    else:
        logger.info(f"metric audit passed on {count - len(failures)} triples")
    return report
