"""
JSON problem files: schema, validation with JSON-pointer error paths, and conversion to solver inputs
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from .config import SolverConfig
from .errors import ProblemFileError
from .operators import Boundary, Grid1D, MatrixField
from .solver import ProblemKind
from .spectra import DEFAULT_GRID_SIZE, sample_spectrum


logger = logging.getLogger(__name__)

Entry = Union[float, Tuple[float, float]]
Matrix = List[List[Entry]]
FieldValues = List[Union[float, Matrix]]

_MATRIX = TypeAdapter(Matrix)
_FIELD = TypeAdapter(FieldValues)


class SpectrumRef(BaseModel):
    """Reference to one of the built-in AR spectra"""
    model_config = ConfigDict(extra="forbid")

    spectrum: Literal["rho0", "rho1", "rho2"] = Field(description="Spectrum id")
    variant: Optional[Literal["as_printed", "canonical"]] = Field(
        default=None, description="AR polynomial sign pattern"
    )


class GridModel(BaseModel):
    """Uniform 1-D grid"""
    model_config = ConfigDict(extra="forbid")

    M: int = Field(description="Number of grid points", ge=2)
    h: Union[float, Literal["auto2pi"]] = Field(default=1.0, description="Spacing, or auto2pi for 2 pi / M")
    boundary: Literal["periodic", "zero_flux"] = Field(default="periodic", description="Boundary rule")

    def to_grid(self) -> Grid1D:
        h = 2.0 * np.pi / self.M if self.h == "auto2pi" else float(self.h)
        return Grid1D(self.M, h, Boundary(self.boundary))


class ProblemFile(BaseModel):
    """Top-level problem file"""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["balanced_matrix", "unbalanced_matrix", "balanced_field", "unbalanced_field"] = Field(
        description="Problem kind"
    )
    rho0: Union[SpectrumRef, List[Any]] = Field(description="First marginal: matrix, field values or spectrum")
    rho1: Union[SpectrumRef, List[Any]] = Field(description="Second marginal")
    L: Optional[List[Matrix]] = Field(default=None, description="L family (omit for n = 1)")
    alpha: Optional[float] = Field(default=None, gt=0, description="Source weight (unbalanced kinds)")
    beta1: Optional[float] = Field(default=None, gt=0, description="Spatial flux weight (field kinds)")
    beta2: Optional[float] = Field(default=None, gt=0, description="Commutator flux weight (field kinds)")
    grid: Optional[GridModel] = Field(default=None, description="Grid (field kinds)")
    solver: Optional[Dict[str, Any]] = Field(default=None, description="SolverConfig overrides")


@dataclass
class LoadedProblem:
    """Solver-ready inputs read from a problem file"""
    kind: ProblemKind
    rho0: Any
    rho1: Any
    L: Optional[np.ndarray]
    grid: Optional[Grid1D]
    alpha: Optional[float]
    beta1: Optional[float]
    beta2: Optional[float]
    config: SolverConfig
    labels: Tuple[str, str] = ("rho0", "rho1")


def _escape(token) -> str:
    return str(token).replace("~", "~0").replace("/", "~1")


def json_pointer(loc: Tuple, document: Any, error_type: str = "") -> str:
    """Pointer into the raw document for a pydantic error location; union member tags are skipped"""
    node, parts = document, []
    for item in loc:
        if isinstance(node, dict) and item in node:
            parts.append(_escape(item))
            node = node[item]
        elif isinstance(node, list) and isinstance(item, int) and 0 <= item < len(node):
            parts.append(str(item))
            node = node[item]
    if error_type == "missing" and loc and isinstance(loc[-1], str) and not (isinstance(node, dict) and loc[-1] in node):
        parts.append(_escape(loc[-1]))
    return "/" + "/".join(parts)


def _raise_from(error: ValidationError, document: Any, prefix: Tuple = ()) -> None:
    paths, lines = [], []
    for item in error.errors():
        pointer = json_pointer(prefix + tuple(item["loc"]), document, item.get("type", ""))
        if pointer not in paths:
            paths.append(pointer)
            lines.append(f"{pointer}: {item['msg']}")
    raise ProblemFileError("invalid problem file:\n  " + "\n  ".join(lines), paths) from error


def _to_complex(value) -> complex:
    if isinstance(value, tuple):
        return complex(value[0], value[1])
    return complex(value)


def _matrix_array(rows: Matrix) -> np.ndarray:
    width = {len(r) for r in rows}
    if len(width) != 1 or width.pop() != len(rows):
        raise ValueError("matrix must be square")
    return np.array([[_to_complex(v) for v in row] for row in rows], dtype=complex)


def _parse(adapter: TypeAdapter, value, document, path: Tuple):
    try:
        return adapter.validate_python(value)
    except ValidationError as e:
        _raise_from(e, document, path)


def _marginal(value, kind: ProblemKind, document, key: str, grid: Optional[Grid1D]):
    if isinstance(value, SpectrumRef):
        if not kind.is_field:
            raise ProblemFileError(f"/{key}: spectra are only valid for field kinds", [f"/{key}"])
        variant = value.variant or "as_printed"
        return sample_spectrum(value.spectrum, grid, variant)
    try:
        if kind.is_field:
            items = _parse(_FIELD, value, document, (key,))
            return np.array([_to_complex(v) if not isinstance(v, list) else _matrix_array(v) for v in items])
        return _matrix_array(_parse(_MATRIX, value, document, (key,)))
    except ValueError as e:
        raise ProblemFileError(f"/{key}: {e}", [f"/{key}"]) from e


def _labels(pf: ProblemFile) -> Tuple[str, str]:
    """Spectrum ids for spectrum marginals, the marginal keys otherwise"""
    labels = [ref.spectrum if isinstance(ref, SpectrumRef) else key for key, ref in (("rho0", pf.rho0), ("rho1", pf.rho1))]
    if labels[0] == labels[1]:
        labels = [f"rho0_{labels[0]}", f"rho1_{labels[1]}"]
    return labels[0], labels[1]


def parse_problem(
    document: Dict[str, Any], base: Optional[SolverConfig] = None, overrides: Optional[Dict[str, Any]] = None
) -> LoadedProblem:
    """Validate a decoded JSON document and convert it to solver inputs

    Solver settings stack as base, then the file's solver section, then overrides.
    """
    try:
        pf = ProblemFile.model_validate(document)
    except ValidationError as e:
        _raise_from(e, document)

    kind = ProblemKind(pf.kind)
    base = base or SolverConfig()
    try:
        config = base.with_overrides(**(pf.solver or {}))
    except ValidationError as e:
        _raise_from(e, document, ("solver",))
    config = config.with_overrides(**(overrides or {}))

    grid = pf.grid.to_grid() if pf.grid is not None else None
    if kind.is_field and grid is None:
        if isinstance(pf.rho0, SpectrumRef) or isinstance(pf.rho1, SpectrumRef):
            grid = Grid1D.periodic_2pi(DEFAULT_GRID_SIZE)
        else:
            raise ProblemFileError("/grid: field kinds need a grid", ["/grid"])

    rho0 = _marginal(pf.rho0, kind, document, "rho0", grid)
    rho1 = _marginal(pf.rho1, kind, document, "rho1", grid)
    if kind.is_field:
        rho0 = rho0 if isinstance(rho0, MatrixField) else MatrixField(grid, rho0)
        rho1 = rho1 if isinstance(rho1, MatrixField) else MatrixField(grid, rho1)
    L = None
    if pf.L is not None:
        try:
            L = np.array([_matrix_array(m) for m in pf.L])
        except ValueError as e:
            raise ProblemFileError(f"/L: {e}", ["/L"]) from e
    return LoadedProblem(kind, rho0, rho1, L, grid, pf.alpha, pf.beta1, pf.beta2, config, _labels(pf))


def load_problem(
    path: Union[str, Path], base: Optional[SolverConfig] = None, overrides: Optional[Dict[str, Any]] = None
) -> LoadedProblem:
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ProblemFileError(f"cannot read problem file {path}: {e}", ["/"]) from e
    if not isinstance(document, dict):
        raise ProblemFileError("problem file must hold a JSON object", ["/"])
    logger.debug(f"loaded problem file {path}")
    return parse_problem(document, base, overrides)
