"""
Command-line front end

Exit codes: 0 success, 1 input error, 2 not converged, 3 failed check.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from dotenv import load_dotenv

from .config import SolverConfig
from .core import random_density, random_hermitian, random_skew, real_inner
from .distances import (
    DensityTripleSampler,
    FieldTripleSampler,
    field_v1,
    field_w1,
    metric_audit,
    v1,
    w1,
)
from .errors import MatrixW1Error, ProblemFileError
from .operators import (
    Grid1D,
    LFamily,
    MatrixField,
    backward_difference,
    check_kernel,
    commutator_div,
    commutator_grad,
    forward_difference,
)
from .oracle import circular_emd, dual_grid_search, line_emd
from .problem_file import LoadedProblem, load_problem, parse_problem
from .solver import Certificate, ProblemKind
from .spectra import (
    DEFAULT_GRID_SIZE,
    TABLE1_L,
    PolynomialVariant,
    SpectrumId,
    reproduce_table1,
    spectra_table,
)


logger = logging.getLogger("matrix_w1")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2
EXIT_CHECK_FAILED = 3

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


# --- serialization ---------------------------------------------------------


def _complex_json(arr: np.ndarray) -> list:
    arr = np.asarray(arr, dtype=complex)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def certificate_to_dict(cert: Certificate) -> Dict[str, Any]:
    flux = cert.flux
    layout = flux.layout
    source = layout.source(flux.array)
    potential = cert.potential.values if isinstance(cert.potential, MatrixField) else cert.potential.entries
    return {
        "kind": cert.problem.kind.value if cert.problem is not None else None,
        "value": cert.primal_value,
        "dual_value": cert.dual_value,
        "gap": cert.gap,
        "residual": cert.residual,
        "fixed_point_residual": cert.fixed_point_residual,
        "potential_constraint": cert.potential_constraint,
        "iterations": cert.iterations,
        "converged": cert.converged,
        "flux": {
            "shape": list(layout.shape),
            "transport": _complex_json(flux.transport),
            "source": _complex_json(source) if source is not None else None,
        },
        "potential": _complex_json(potential),
    }


def write_certificate(cert: Certificate, path: Path) -> None:
    path.write_text(json.dumps(certificate_to_dict(cert), indent=2) + "\n", encoding="utf-8")
    logger.info(f"certificate written to {path}")


def load_certificate_flux(path) -> np.ndarray:
    """Flux array (points, slots, n, n) stored in a certificate file"""
    data = json.loads(Path(path).read_text(encoding="utf-8"))["flux"]
    shape = tuple(data["shape"])
    flux = np.zeros(shape, dtype=complex)
    points, slots = shape[0], shape[1]
    transport_count = slots - (data["source"] is not None)
    if transport_count:
        flux[:, :transport_count] = _complex_from_json(data["transport"]).reshape(points, transport_count, *shape[2:])
    if data["source"] is not None:
        flux[:, transport_count] = _complex_from_json(data["source"]).reshape(points, *shape[2:])
    return flux


def _fmt(x: float) -> str:
    # shortest round-trip text; independent of locale
    return repr(float(x))


def _write_csv(rows: List[List[Any]], out: Optional[Path]) -> None:
    if out is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerows(rows)
        return
    with open(out, "w", newline="", encoding="utf-8") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    logger.info(f"wrote {len(rows) - 1} rows to {out}")


def spectra_rows(fields: Dict[Union[SpectrumId, str], MatrixField]) -> List[List[str]]:
    """theta, then Re/Im of every entry of every field, columns prefixed by the field's label"""
    grid = next(iter(fields.values())).grid
    header = ["theta"]
    for key, field in fields.items():
        label = key.value if isinstance(key, SpectrumId) else str(key)
        for i in range(field.n):
            for j in range(field.n):
                header += [f"{label}_{i + 1}{j + 1}_re", f"{label}_{i + 1}{j + 1}_im"]
    rows = [header]
    for k, theta in enumerate(grid.coordinates):
        row = [_fmt(theta)]
        for field in fields.values():
            for value in field.values[k].ravel():
                row += [_fmt(value.real), _fmt(value.imag)]
        rows.append(row)
    return rows


# --- solve commands --------------------------------------------------------


def _report(cert: Certificate, out: Optional[Path]) -> int:
    print(f"value: {cert.value:.6f}")
    print(f"dual_value: {cert.dual_value:.6f}")
    print(f"gap: {cert.gap:.3e}")
    print(f"residual: {cert.residual:.3e}")
    print(f"iterations: {cert.iterations}")
    print(f"converged: {cert.converged}")
    if out is not None:
        write_certificate(cert, out)
    return EXIT_OK if cert.converged else EXIT_NOT_CONVERGED


def _solver_flags(args) -> Dict[str, Any]:
    """Solver flags given on the command line; they win over a file's solver section"""
    names = ("max_iter", "tol_gap", "seed", "workers")
    return {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}


def _solver_config(args) -> SolverConfig:
    return SolverConfig().with_overrides(**_solver_flags(args))


def cmd_w1(args) -> int:
    problem = load_problem(args.problem, overrides=_solver_flags(args))
    if problem.kind.is_field:
        raise ProblemFileError("/kind: field problems are solved with the 'field' command", ["/kind"])
    cert = w1(problem.rho0, problem.rho1, problem.L, problem.config)
    return _report(cert, args.out)


def cmd_v1(args) -> int:
    problem = load_problem(args.problem, overrides=_solver_flags(args))
    if problem.kind.is_field:
        raise ProblemFileError("/kind: field problems are solved with the 'field' command", ["/kind"])
    alpha = args.alpha if args.alpha is not None else problem.alpha
    if alpha is None:
        raise ProblemFileError("/alpha: v1 needs alpha (in the file or --alpha)", ["/alpha"])
    cert = v1(problem.rho0, problem.rho1, problem.L, alpha, problem.config)
    return _report(cert, args.out)


def _field_problem(args) -> LoadedProblem:
    """Problem file with --grid-size / --boundary / --variant applied before validation"""
    path = Path(args.problem)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ProblemFileError(f"cannot read problem file {path}: {e}", ["/"]) from e
    if not isinstance(document, dict):
        raise ProblemFileError("problem file must hold a JSON object", ["/"])
    if args.grid_size is not None or args.boundary is not None:
        grid = dict(document.get("grid") or {"M": DEFAULT_GRID_SIZE, "h": "auto2pi"})
        if args.grid_size is not None:
            grid["M"] = args.grid_size
        if args.boundary is not None:
            grid["boundary"] = args.boundary
        document["grid"] = grid
    if args.variant is not None:
        for key in ("rho0", "rho1"):
            if isinstance(document.get(key), dict):
                document[key] = {**document[key], "variant": args.variant}
    return parse_problem(document, overrides=_solver_flags(args))


def cmd_field(args) -> int:
    problem = _field_problem(args)
    if not problem.kind.is_field:
        raise ProblemFileError("/kind: the 'field' command needs balanced_field or unbalanced_field", ["/kind"])
    if args.spectra_csv is not None:
        _write_csv(spectra_rows(dict(zip(problem.labels, (problem.rho0, problem.rho1)))), args.spectra_csv)
    beta1 = args.beta1 if args.beta1 is not None else problem.beta1
    beta2 = args.beta2 if args.beta2 is not None else problem.beta2
    alpha = args.alpha if args.alpha is not None else problem.alpha
    if problem.kind is ProblemKind.BALANCED_FIELD:
        cert = field_w1(problem.rho0, problem.rho1, problem.L, beta1 or 1.0, beta2 or 1.0, problem.config)
    else:
        if alpha is None:
            raise ProblemFileError("/alpha: unbalanced_field needs alpha (in the file or --alpha)", ["/alpha"])
        cert = field_v1(problem.rho0, problem.rho1, problem.L, alpha, beta1 or 1.0, beta2 or 1.0, problem.config)
    return _report(cert, args.out)


def cmd_spectra(args) -> int:
    grid = Grid1D.periodic_2pi(args.grid_size)
    _write_csv(spectra_rows(spectra_table(grid, args.variant)), args.out)
    return EXIT_OK


def cmd_table1(args) -> int:
    config = _solver_config(args)
    grid = Grid1D.periodic_2pi(args.grid_size)
    result = reproduce_table1(grid, alpha=args.alpha, variant=args.variant, config=config)
    rows = [["beta1", "beta2", "pair", "value", "gap", "converged", "reference_value"]]
    for e in result.entries:
        rows.append(
            [
                _fmt(e.beta1),
                _fmt(e.beta2),
                e.label,
                _fmt(e.value),
                _fmt(e.gap),
                str(e.converged).lower(),
                "" if e.reference_value is None else _fmt(e.reference_value),
            ]
        )
    _write_csv(rows, args.out)
    for name, claim in (("rotation (beta1 >> beta2)", result.rotation_claim), ("translation (beta1 << beta2)", result.translation_claim)):
        status = "SKIP" if claim is None else ("PASS" if claim else "FAIL")
        print(f"{status} ordering claim {name}", file=sys.stderr if args.out is None else sys.stdout)
    if not result.passed:
        return EXIT_CHECK_FAILED
    if not all(e.converged for e in result.entries):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# --- self-check ------------------------------------------------------------


CheckResult = Tuple[str, bool, str]


def _random_family(n: int, count: int, rng: np.random.Generator) -> LFamily:
    while True:
        family = LFamily([random_hermitian(n, rng) for _ in range(count)])
        if family.kernel.passed:
            return family


def check_adjointness(rng: np.random.Generator, n: int, pairs: int = 100) -> List[CheckResult]:
    family = _random_family(n, 2, rng)
    worst_l = worst_x = worst_trace = 0.0
    grid = Grid1D(8, 0.5)
    for _ in range(pairs):
        f = random_hermitian(n, rng)
        u = np.array([random_skew(n, rng) for _ in range(family.N)])
        lhs = real_inner(commutator_grad(family.matrices, f), u)
        rhs = real_inner(f, commutator_div(family.matrices, u))
        worst_l = max(worst_l, abs(lhs - rhs) / (np.linalg.norm(f) * np.linalg.norm(u)))
        worst_trace = max(worst_trace, abs(np.trace(commutator_div(family.matrices, u))))
        fx = np.array([random_hermitian(n, rng) for _ in range(grid.M)])
        ux = np.array([random_hermitian(n, rng) for _ in range(grid.edge_count)])
        lhs = grid.h * real_inner(forward_difference(fx, grid), ux)
        rhs = -grid.h * real_inner(fx, backward_difference(ux, grid))
        worst_x = max(worst_x, abs(lhs - rhs) / (np.linalg.norm(fx) * np.linalg.norm(ux)))
    return [
        (f"adjoint grad_L/div_L n={n}", worst_l <= 1e-10, f"worst {worst_l:.2e}"),
        (f"adjoint grad_x/div_x n={n}", worst_x <= 1e-10, f"worst {worst_x:.2e}"),
        (f"traceless div_L n={n}", worst_trace <= 1e-12, f"worst {worst_trace:.2e}"),
    ]


def check_kernels() -> List[CheckResult]:
    table = check_kernel(TABLE1_L)
    identity = check_kernel([np.eye(2)])
    return [
        ("kernel of the spectra L family", table.passed, f"nullity {table.nullity}"),
        ("kernel of L = [I] rejected", not identity.passed, f"nullity {identity.nullity}"),
    ]


def check_oracles(config: SolverConfig, rng: np.random.Generator, count: int) -> List[CheckResult]:
    config = config.with_overrides(tol_gap=min(config.tol_gap, 1e-8))
    results = []
    pauli = [np.array([[0.0, 1.0], [1.0, 0.0]])]
    rho0, rho1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    cert = w1(rho0, rho1, pauli, config)
    bound = dual_grid_search(rho0, rho1, pauli, box=2.0, steps=201)
    results.append(
        ("Pauli instance", abs(cert.value - 1.0) <= 1e-6 and bound >= 0.99, f"value {cert.value:.9f}, grid bound {bound:.6f}")
    )
    worst = 0.0
    for boundary, oracle in (("periodic", circular_emd), ("zero_flux", line_emd)):
        grid = Grid1D(16, 1.0 / 16, boundary)
        for _ in range(count):
            p0, p1 = rng.uniform(0, 1, grid.M), rng.uniform(0, 1, grid.M)
            p0 /= grid.h * p0.sum()
            p1 /= grid.h * p1.sum()
            cert = field_w1(MatrixField.from_scalars(grid, p0), MatrixField.from_scalars(grid, p1), config=config)
            worst = max(worst, abs(cert.value - oracle(p0, p1, grid)))
    results.append(("scalar reduction vs closed-form EMD", worst <= 1e-6, f"worst {worst:.2e}"))
    return results


def check_gaps(config: SolverConfig, rng: np.random.Generator, dims: Sequence[int], count: int) -> List[CheckResult]:
    results = []
    for n in dims:
        for N in (1, 2):
            family = _random_family(n, N, rng)
            worst, unconverged = 0.0, 0
            for _ in range(count):
                cert = w1(random_density(n, rng), random_density(n, rng), family, config)
                worst = max(worst, cert.relative_gap)
                unconverged += not cert.converged
            results.append(
                (f"duality gap n={n} N={N}", unconverged == 0 and worst <= 1e-5, f"worst {worst:.2e}, unconverged {unconverged}")
            )
    return results


def check_metrics(config: SolverConfig, rng: np.random.Generator, dims: Sequence[int], count: int) -> List[CheckResult]:
    results = []
    for n in dims:
        family = _random_family(n, 2, rng)
        for alpha in (None, 1.0):
            report = metric_audit(DensityTripleSampler(n, family, alpha), count, config)
            name = "w1" if alpha is None else f"v1 alpha={alpha}"
            results.append((f"metric axioms {name} n={n}", report.passed, f"worst {report.worst}"))
    report = metric_audit(FieldTripleSampler(Grid1D(12, 1.0 / 12)), count, config)
    results.append(("metric axioms scalar field", report.passed, f"worst {report.worst}"))
    return results


def cmd_check(args) -> int:
    config = _solver_config(args)
    rng = np.random.default_rng(args.seed)
    suites: List[Callable[[], List[CheckResult]]] = [
        lambda: [r for n in args.dims for r in check_adjointness(rng, n)],
        check_kernels,
        lambda: check_oracles(config, rng, args.count),
        lambda: check_gaps(config, rng, args.dims, args.count),
        lambda: check_metrics(config, rng, args.dims, args.count),
    ]
    failed = 0
    for suite in suites:
        try:
            results = suite()
        except MatrixW1Error as e:
            logger.error(f"check suite raised: {e}")
            results = [("suite error", False, str(e))]
        for name, passed, detail in results:
            failed += not passed
            print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    print(f"{failed} failure(s)")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


# --- entry point -----------------------------------------------------------


def _dims(text: str) -> List[int]:
    try:
        dims = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or any(d < 2 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must be >= 2")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="w1_cli", description="Matricial Wasserstein-1 distances with duality-gap certificates"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--max-iter", type=int, default=None, help="Override SolverConfig.max_iter")
    solver.add_argument("--tol-gap", type=float, default=None, help="Override SolverConfig.tol_gap")
    solver.add_argument("--workers", type=int, default=None, help="Thread pool size for batches")

    variants = [v.value for v in PolynomialVariant]

    p = sub.add_parser("w1", parents=[solver], help="Balanced W1 between two density matrices")
    p.add_argument("problem", type=Path)
    p.add_argument("--out", type=Path, default=None, help="Write the certificate JSON here")
    p.set_defaults(handler=cmd_w1)

    p = sub.add_parser("v1", parents=[solver], help="Unbalanced V1 between two PSD matrices")
    p.add_argument("problem", type=Path)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_v1)

    p = sub.add_parser("field", parents=[solver], help="W1 / V1 between matrix-valued densities on a grid")
    p.add_argument("problem", type=Path)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta1", type=float, default=None)
    p.add_argument("--beta2", type=float, default=None)
    p.add_argument("--grid-size", type=int, default=None)
    p.add_argument("--boundary", choices=["periodic", "zero_flux"], default=None)
    p.add_argument("--variant", choices=variants, default=None)
    p.add_argument("--spectra-csv", type=Path, default=None, help="Also write the sampled marginals as CSV")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_field)

    p = sub.add_parser("table1", parents=[solver], help="Distances between the three AR spectra")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--variant", choices=variants, default=PolynomialVariant.AS_PRINTED.value)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out", type=Path, default=None, help="CSV path (stdout if omitted)")
    p.set_defaults(handler=cmd_table1)

    p = sub.add_parser("spectra", help="Sampled AR spectra as CSV")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--variant", choices=variants, default=PolynomialVariant.AS_PRINTED.value)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=cmd_spectra)

    p = sub.add_parser("check", parents=[solver], help="Run the structural, oracle, gap and metric suites")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=_dims, default=[2, 3])
    p.set_defaults(handler=cmd_check)
    return parser


def configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else os.getenv("MATW1_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except ProblemFileError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except MatrixW1Error as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        # pydantic ValidationError for environment / flag overrides
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
