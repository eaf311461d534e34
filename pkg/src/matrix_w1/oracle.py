"""
Solver-free reference values: closed-form scalar EMD and brute-force dual search
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .core import make_density
from .errors import ParameterError, ShapeMismatch, TraceMismatch
from .operators import Grid1D, LFamily


logger = logging.getLogger(__name__)

MASS_TOL = 1e-9
# admits grid points on the constraint boundary; they are rescaled onto it
FEASIBILITY_TOL = 1e-9


def _cumulative_difference(p0: Sequence[float], p1: Sequence[float], grid: Grid1D) -> np.ndarray:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if p0.shape != (grid.M,) or p1.shape != (grid.M,):
        raise ShapeMismatch(f"densities must have {grid.M} entries, got {p0.shape} and {p1.shape}")
    if np.any(p0 < 0) or np.any(p1 < 0):
        raise ParameterError("scalar densities must be nonnegative")
    m0, m1 = grid.h * p0.sum(), grid.h * p1.sum()
    if abs(m0 - m1) > MASS_TOL * max(abs(m0), abs(m1), 1e-300):
        raise TraceMismatch(f"total masses differ: {m0:.12g} vs {m1:.12g}")
    return np.cumsum((p0 - p1) * grid.h)


def circular_emd(p0: Sequence[float], p1: Sequence[float], grid: Grid1D) -> float:
    """W1 on the discretized circle: h * sum_k |F_k - median(F)|"""
    F = _cumulative_difference(p0, p1, grid)
    return float(grid.h * np.sum(np.abs(F - np.median(F))))


def line_emd(p0: Sequence[float], p1: Sequence[float], grid: Grid1D) -> float:
    """W1 on an interval: h * sum_k |F_k|"""
    F = _cumulative_difference(p0, p1, grid)
    return float(grid.h * np.sum(np.abs(F)))


def _real_symmetric(m, name: str) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (2, 2):
        raise ParameterError(f"dual grid search works on 2 x 2 data, {name} has shape {arr.shape}")
    if np.max(np.abs(arr.imag)) > 1e-12 or abs(arr[0, 1] - arr[1, 0]) > 1e-12:
        raise ParameterError(f"dual grid search needs real symmetric data, {name} is not")
    return arr.real


def dual_grid_search(
    rho0,
    rho1,
    L,
    box: float = 2.0,
    steps: int = 201,
    alpha: Optional[float] = None,
    workers: int = 1,
) -> float:
    """Best tr(f (rho0 - rho1)) over real symmetric f on a [-box, box]^3 grid with ||grad_L f|| <= 1

    For real symmetric f and L_k every commutator is g_k [[0, 1], [-1, 0]],
    so ||grad_L f||^2 = sum_k g_k^2. With alpha the extra constraint
    ||f|| <= alpha is imposed. Candidates are scaled into the feasible set,
    so the result never exceeds the distance.
    """
    matrices = L.matrices if isinstance(L, LFamily) else np.asarray(L, dtype=complex)
    ls = [_real_symmetric(m, f"L[{k}]") for k, m in enumerate(matrices)]
    b = _real_symmetric(np.asarray(make_density(rho0).entries) - np.asarray(make_density(rho1).entries), "rho0 - rho1")
    off = np.array([l[0, 1] for l in ls])
    split = np.array([l[0, 0] - l[1, 1] for l in ls])

    axis = np.linspace(-box, box, steps)
    fb, fc = np.meshgrid(axis, axis, indexing="ij")

    def best_for(fa: float) -> float:
        # g_k = L01 (b - a) + c (L00 - L11)
        g = off[:, None, None] * (fb - fa)[None] + split[:, None, None] * fc[None]
        ratio = np.sqrt(np.sum(g ** 2, axis=0))
        if alpha is not None:
            norm = np.abs(fa + fb) / 2 + np.sqrt(((fa - fb) / 2) ** 2 + fc ** 2)
            ratio = np.maximum(ratio, norm / alpha)
        feasible = ratio <= 1.0 + FEASIBILITY_TOL
        objective = (fa * b[0, 0] + fb * b[1, 1] + 2 * fc * b[0, 1]) / np.maximum(ratio, 1.0)
        return float(np.max(np.where(feasible, objective, -np.inf)))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        best = max(executor.map(best_for, axis))
    logger.debug(f"dual grid search: box={box}, steps={steps}, bound={best:.10g}")
    return best
