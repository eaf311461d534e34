"""
Solver configuration
"""

from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SolverConfig(BaseSettings):
    """Settings for the Douglas-Rachford solver and its projection

    Every field can be overridden from the environment with the ``MATW1_``
    prefix (e.g. ``MATW1_MAX_ITER=2000``); explicit keyword arguments win.
    """

    model_config = SettingsConfigDict(env_prefix="MATW1_", extra="forbid", frozen=True)

    max_iter: int = Field(default=50000, ge=1, description="Maximum DR iterations")
    tol_residual: float = Field(default=1e-8, gt=0, description="Relative fixed-point / constraint residual")
    tol_gap: float = Field(default=1e-6, gt=0, description="Relative duality gap gap/max(1, value)")
    dr_gamma: float = Field(
        default=1.0, gt=0, description="Initial prox threshold, relative to the least-norm feasible flux per group"
    )
    dr_relaxation: float = Field(default=1.5, gt=0, lt=2, description="Relaxation of the DR update (1 = plain)")
    gamma_adapt_until: int = Field(
        default=5000, ge=0, description="Last iteration at which the threshold is rebalanced (0 = fixed)"
    )
    gamma_balance: float = Field(default=10.0, gt=1, description="Residual ratio that triggers a rebalance")
    gamma_factor: float = Field(default=2.0, gt=1, description="Threshold change per rebalance")
    cg_tol: float = Field(default=1e-12, gt=0, description="Relative tolerance of the projection solve")
    cg_max_iter: Optional[int] = Field(default=None, ge=1, description="CG iterations (default 10 x dimension)")
    seed: int = Field(default=0, description="Seed for randomized initialization and sampling")
    check_every: int = Field(default=10, ge=1, description="Iterations between certificate evaluations")
    projection: Literal["auto", "factorized", "cg"] = Field(
        default="auto", description="Gram solve used by the affine projection"
    )
    dense_max_dim: int = Field(default=2000, ge=1, description="Largest factor dimension for the factorized solve")
    kernel_tol: float = Field(default=1e-10, gt=0, description="Relative singular value threshold for kernels")
    workers: int = Field(default=1, ge=1, description="Thread pool size for batches of solves")

    def with_overrides(self, **overrides) -> "SolverConfig":
        """Return a validated copy with the given fields replaced"""
        values = self.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SolverConfig(**values)
