import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from optimizer.config import SolverConfig, SolverState, SolveReport
from optimizer.exceptions import InvalidInput, NumericalBreakdown
from optimizer.memory import MemoryStore
from optimizer.tensor_lab import (
    PairTensor,
    armr_norm,
    armr_prox,
    l21_norm,
    procrustes_min,
    shrink_columns_21,
)

logger = logging.getLogger(__name__)


def orthogonality_residual(q: np.ndarray) -> float:
    """||Q Q^T - I||_inf for a row-orthonormal Q"""
    return float(np.max(np.abs(q @ q.T - np.eye(q.shape[0]))))


def update_basis(x, z, e, y, mu: float) -> np.ndarray:
    """A = argmin ||(X - E + Y/mu) - Z A||_F^2 s.t. A A^T = I"""
    return procrustes_min(x - e + y / mu, z)


def update_noise(x, z, a, y, mu: float) -> np.ndarray:
    """Column-wise l2,1 shrinkage of C = X - Z A + Y/mu with threshold 1/mu"""
    return shrink_columns_21(x - z @ a + y / mu, 1.0 / mu)


def update_alignment(z, prev_z) -> np.ndarray:
    """P = argmin ||Z_t - Z_{t-1} P||_F^2 s.t. P P^T = I"""
    return procrustes_min(z, prev_z)


def update_representation(x, a, e, y, prev_z, p, m_cur, j_cur, mu: float, rho: float,
                          alpha: float, use_tensor: bool = True) -> np.ndarray:
    """
    Closed-form Z_t. The system matrix (mu + 2 alpha + rho) I is diagonal, so the
    inverse is a scalar division. Only the current tensor slices enter.
    """
    numerator = (mu * (x - e) + y) @ a.T
    denominator = mu
    if alpha > 0:
        numerator = numerator + 2.0 * alpha * (prev_z @ p)
        denominator += 2.0 * alpha
    if use_tensor:
        numerator = numerator + rho * m_cur - j_cur
        denominator += rho
    return numerator / denominator


def representation_objective(z, x, a, e, y, prev_z, p, m_cur, j_cur, mu: float, rho: float,
                             alpha: float) -> float:
    """Z_t subproblem: alignment, recon penalty and tensor penalty terms"""
    align = alpha * np.sum((z - prev_z @ p) ** 2)
    recon = 0.5 * mu * np.sum((x - z @ a - e + y / mu) ** 2)
    tensor = 0.5 * rho * np.sum((z - m_cur + j_cur / rho) ** 2)
    return float(align + recon + tensor)


def update_consolidation(stacked: PairTensor, j: PairTensor, rho: float, beta: float) -> PairTensor:
    """M = prox of (beta/rho) * ARMR at Z + J/rho"""
    return armr_prox(stacked + j.scale(1.0 / rho), beta / rho)


@dataclass
class StreamResult:
    representation: np.ndarray
    reports: List[SolveReport]
    store: MemoryStore
    representations: List[np.ndarray] = field(default_factory=list)


class MemEvoSolver:
    """View-incremental ADMM solver"""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.logger = logging.getLogger(__name__)
        self.state: Optional[SolverState] = None

    def _check_view(self, x, view_index: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise InvalidInput(f"view {view_index} must be a matrix, got ndim={x.ndim}")
        if not np.all(np.isfinite(x)):
            raise InvalidInput(f"view {view_index} contains NaN or Inf entries")
        n, d = x.shape
        m = self.config.latent_dim
        if m > min(n, d):
            raise InvalidInput(f"latent_dim={m} exceeds min(n, d)={min(n, d)} for view {view_index}")
        return x

    def _initial_basis(self, d: int) -> np.ndarray:
        rng = np.random.default_rng(self.config.seed)
        q, _ = np.linalg.qr(rng.standard_normal((d, self.config.latent_dim)))
        return q.T

    @staticmethod
    def _ensure_finite(view_index: int, *arrays):
        for arr in arrays:
            if not np.all(np.isfinite(arr)):
                raise NumericalBreakdown("non-finite iterate encountered", view_index=view_index)

    def solve_initial_view(self, x1, view_index: int = 1):
        """Reconstruction-only solve: A, Z, E, then Y and mu"""
        cfg = self.config
        x = self._check_view(x1, view_index)
        start = time.perf_counter()

        a = self._initial_basis(x.shape[1])
        z = x @ a.T
        e = np.zeros_like(x)
        y = np.zeros_like(x)
        mu = cfg.mu0
        report = SolveReport(view_index=view_index)

        try:
            for iteration in range(1, cfg.max_iters + 1):
                a = update_basis(x, z, e, y, mu)
                z = (x - e + y / mu) @ a.T
                e = update_noise(x, z, a, y, mu)

                residual = x - z @ a - e
                y = y + mu * residual
                mu = min(cfg.delta * mu, cfg.mu_max)
                self._ensure_finite(view_index, a, z, e, y)

                recon_res = float(np.max(np.abs(residual)))
                report.recon_trace.append(recon_res)
                report.tensor_trace.append(0.0)
                report.orthogonality_trace.append(orthogonality_residual(a))
                report.mu_trace.append(mu)
                report.objective_trace.append({'recon': l21_norm(x - z @ a), 'align': 0.0, 'consolidate': 0.0})
                report.iterations = iteration
                report.recon_residual = recon_res

                if iteration % 10 == 0:
                    self.logger.debug(f"view {view_index} iter {iteration}: recon={recon_res:.3e}, mu={mu:.1e}")
                if recon_res < cfg.tol:
                    report.converged = True
                    break
        except InvalidInput as err:
            # kernels reject non-finite operands produced by the iteration itself
            raise NumericalBreakdown(str(err), view_index=view_index) from err

        report.wall_time = time.perf_counter() - start
        self.state = SolverState(a=a, z=z, e=e, y=y, mu=mu)
        self.logger.info(
            f"View {view_index} solved in {report.iterations} iterations "
            f"(recon={report.recon_residual:.2e}, converged={report.converged}, {report.wall_time:.3f}s)"
        )
        return z, report

    def solve_incremental_view(self, xt, prev_z, store: MemoryStore, t: int):
        """Full incremental body: Z_hist, then A, E, P, Z, M, multipliers and penalties"""
        cfg = self.config
        if t < 2:
            raise InvalidInput(f"incremental solve needs t >= 2, got {t}")
        if len(store) != t - 1:
            raise InvalidInput(f"memory holds {len(store)} views but view {t} needs {t - 1}")
        x = self._check_view(xt, t)
        prev_z = np.asarray(prev_z, dtype=float)
        n, m = x.shape[0], cfg.latent_dim
        if prev_z.shape != (n, m):
            raise InvalidInput(f"previous representation has shape {prev_z.shape}, expected {(n, m)}")

        if cfg.alpha == 0 and cfg.beta == 0:
            # no coupling term left: the view decouples from its history
            self.logger.info(f"View {t}: alpha = beta = 0, solving without history")
            return self.solve_initial_view(x, view_index=t)

        start = time.perf_counter()
        z_hist = store.aggregate_history(t)
        use_tensor = cfg.beta > 0

        a = self._initial_basis(x.shape[1])
        z = x @ a.T
        e = np.zeros_like(x)
        y = np.zeros_like(x)
        p = np.eye(m)
        big_m = PairTensor.zeros(n, m)
        j = PairTensor.zeros(n, m)
        mu, rho = cfg.mu0, cfg.rho0
        report = SolveReport(view_index=t)

        try:
            for iteration in range(1, cfg.max_iters + 1):
                a = update_basis(x, z, e, y, mu)
                e = update_noise(x, z, a, y, mu)
                if cfg.alpha > 0:
                    p = update_alignment(z, prev_z)
                z = update_representation(x, a, e, y, prev_z, p, big_m.cur, j.cur, mu, rho, cfg.alpha,
                                          use_tensor=use_tensor)
                self._ensure_finite(t, z)

                stacked = PairTensor(z_hist, z)
                if use_tensor:
                    big_m = update_consolidation(stacked, j, rho, cfg.beta)
                    j = j + (stacked - big_m).scale(rho)
                else:
                    big_m = stacked

                residual = x - z @ a - e
                y = y + mu * residual
                tensor_gap = stacked - big_m
                mu = min(cfg.delta * mu, cfg.mu_max)
                rho = min(cfg.delta * rho, cfg.rho_max)
                self._ensure_finite(t, a, z, e, y, p)
                if not (big_m.is_finite() and j.is_finite()):
                    raise NumericalBreakdown("non-finite tensor iterate encountered", view_index=t)

                recon_res = float(np.max(np.abs(residual)))
                tensor_res = tensor_gap.max_abs()
                report.recon_trace.append(recon_res)
                report.tensor_trace.append(tensor_res)
                report.orthogonality_trace.append(max(orthogonality_residual(a), orthogonality_residual(p)))
                report.mu_trace.append(mu)
                report.rho_trace.append(rho)
                report.objective_trace.append({
                    'recon': l21_norm(x - z @ a),
                    'align': float(np.sum((z - prev_z @ p) ** 2)),
                    'consolidate': armr_norm(stacked) if use_tensor else 0.0,
                })
                report.iterations = iteration
                report.recon_residual = recon_res
                report.tensor_residual = tensor_res

                if iteration % 10 == 0:
                    self.logger.debug(
                        f"view {t} iter {iteration}: recon={recon_res:.3e}, tensor={tensor_res:.3e}, "
                        f"mu={mu:.1e}, rho={rho:.1e}"
                    )
                if max(recon_res, tensor_res) < cfg.tol:
                    report.converged = True
                    break
        except InvalidInput as err:
            raise NumericalBreakdown(str(err), view_index=t) from err

        report.wall_time = time.perf_counter() - start
        self.state = SolverState(a=a, z=z, e=e, y=y, mu=mu, p=p, m=big_m, j=j, rho=rho)
        self.logger.info(
            f"View {t} solved in {report.iterations} iterations "
            f"(recon={report.recon_residual:.2e}, tensor={report.tensor_residual:.2e}, "
            f"converged={report.converged}, {report.wall_time:.3f}s)"
        )
        return z, report

    def run_stream(self, views: Sequence, on_view: Optional[Callable] = None) -> StreamResult:
        """
        Solve views in arrival order, archiving each converged Z_t.

        on_view(t, z_t, report) is called after every view.
        """
        if len(views) == 0:
            raise InvalidInput("stream must contain at least one view")
        n = np.asarray(views[0]).shape[0]
        for t, view in enumerate(views, start=1):
            if np.asarray(view).shape[0] != n:
                raise InvalidInput(f"view {t} has {np.asarray(view).shape[0]} samples, view 1 has {n}")

        store = MemoryStore(self.config.lam)
        reports = []
        representations = []
        z = None
        for t, view in enumerate(views, start=1):
            try:
                if t == 1:
                    z, report = self.solve_initial_view(view, view_index=1)
                else:
                    z, report = self.solve_incremental_view(view, z, store, t)
            except NumericalBreakdown as e:
                self.logger.error(f"Numerical breakdown in stream: {e}")
                raise
            store.archive_view(z)
            reports.append(report)
            representations.append(z)
            if on_view is not None:
                on_view(t, z, report)

        return StreamResult(representation=z, reports=reports, store=store, representations=representations)


def solve_initial_view(x1, cfg: SolverConfig):
    return MemEvoSolver(cfg).solve_initial_view(x1)


def solve_incremental_view(xt, prev_z, store: MemoryStore, t: int, cfg: SolverConfig):
    return MemEvoSolver(cfg).solve_incremental_view(xt, prev_z, store, t)


def run_stream(views: Sequence, cfg: SolverConfig, on_view: Optional[Callable] = None) -> StreamResult:
    return MemEvoSolver(cfg).run_stream(views, on_view=on_view)
