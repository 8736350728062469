from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from optimizer.exceptions import ConfigError
from optimizer.tensor_lab import PairTensor


@dataclass
class SolverConfig:
    """
    ADMM settings shared by every view solve.

    tol is the stopping threshold on the primal residuals. tol = 0 never
    triggers, so every view runs exactly max_iters iterations; the scaling
    experiment relies on that to time a fixed amount of work.
    """
    alpha: float = 0.1
    beta: float = 0.1
    lam: float = 1.5
    latent_dim: int = 20
    mu0: float = 1e-4
    rho0: float = 1e-4
    mu_max: float = 1e10
    rho_max: float = 1e10
    delta: float = 2.0
    max_iters: int = 200
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.lam < 0:
            raise ConfigError("alpha, beta and lambda must be nonnegative")
        if self.latent_dim < 1:
            raise ConfigError(f"latent_dim must be positive, got {self.latent_dim}")
        if self.delta <= 1:
            raise ConfigError(f"delta must exceed 1, got {self.delta}")
        if not (0 < self.mu0 <= self.mu_max):
            raise ConfigError("require 0 < mu0 <= mu_max")
        if not (0 < self.rho0 <= self.rho_max):
            raise ConfigError("require 0 < rho0 <= rho_max")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if self.tol < 0:
            raise ConfigError("tol must be nonnegative")

    def with_overrides(self, **changes) -> "SolverConfig":
        values = asdict(self)
        values.update(changes)
        return SolverConfig(**values)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class SolveReport:
    """Convergence record of one view solve"""
    view_index: int
    iterations: int = 0
    converged: bool = False
    recon_residual: float = float("inf")
    tensor_residual: float = 0.0
    wall_time: float = 0.0
    recon_trace: List[float] = field(default_factory=list)
    tensor_trace: List[float] = field(default_factory=list)
    orthogonality_trace: List[float] = field(default_factory=list)
    mu_trace: List[float] = field(default_factory=list)
    rho_trace: List[float] = field(default_factory=list)
    objective_trace: List[Dict[str, float]] = field(default_factory=list)

    def summary(self) -> Dict:
        return {
            'view_index': self.view_index,
            'iterations': self.iterations,
            'converged': self.converged,
            'recon_residual': self.recon_residual,
            'tensor_residual': self.tensor_residual,
            'wall_time': self.wall_time,
            'final_objective': self.objective_trace[-1] if self.objective_trace else None,
        }


@dataclass
class SolverState:
    """Final ADMM iterates of the most recent view solve"""
    a: np.ndarray
    z: np.ndarray
    e: np.ndarray
    y: np.ndarray
    mu: float
    p: Optional[np.ndarray] = None
    m: Optional[PairTensor] = None
    j: Optional[PairTensor] = None
    rho: Optional[float] = None
