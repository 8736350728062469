"""
Experiment drivers: single stream run, module ablation, forgetting-rate sweep,
per-view curve, runtime scaling, alpha/beta grid and latent-dimension sweep.
"""
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from data.datagen import generate_scaling_series, generate_stream, stale_early_view
from data.run_registry import RunRegistry
from data.view_io import export_labels, export_view, load_labels, load_view
from evaluation.clustering import best_restart, evaluate_labelings, kmeans
from experiments.config import RunConfig
from experiments.manifest import ArmRecord, RunManifest, write_manifest
from optimizer.config import SolverConfig
from optimizer.exceptions import ConfigError
from optimizer.solver import MemEvoSolver

logger = logging.getLogger(__name__)

LAMBDA_GRID = (0.0, 1.0, 1.5, 2.0)
PARAM_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0)
LATENT_GRID = (5, 10, 20, 30, 50)


def load_stream(cfg: RunConfig) -> Tuple[List[np.ndarray], Optional[np.ndarray]]:
    if cfg.synth is not None:
        spec = stale_early_view(cfg.synth, cfg.stale_factor) if cfg.stale_factor else cfg.synth
        return generate_stream(spec)
    views = [load_view(path) for path in cfg.view_paths]
    labels = load_labels(cfg.labels_path) if cfg.labels_path else None
    if labels is not None and labels.shape[0] != views[0].shape[0]:
        raise ConfigError(f"labels file has {labels.shape[0]} entries for {views[0].shape[0]} samples")
    return views, labels


def ablation_arms(solver: SolverConfig) -> List[Tuple[str, SolverConfig]]:
    """Module ablation rows, weakest first"""
    return [
        ('recon_only', solver.with_overrides(alpha=0.0, beta=0.0)),
        ('recon_vam', solver.with_overrides(beta=0.0)),
        ('recon_kcm', solver.with_overrides(alpha=0.0, lam=0.0)),
        ('full_without_cfm', solver.with_overrides(lam=0.0)),
        ('full', solver),
    ]


class ExperimentRunner:
    """Executes one RunConfig and assembles its manifest"""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.logger = logging.getLogger(__name__)
        self.output_dir = Path(cfg.output_dir)

    def _score(self, z, labels):
        results = kmeans(z, self.cfg.k, restarts=self.cfg.restarts, seed=self.cfg.seed)
        return evaluate_labelings([res.labels for res in results], labels), results

    def _run_arm(self, name: str, solver_cfg: SolverConfig, views, labels, params: Dict,
                 per_view_metrics: bool = False) -> Tuple[ArmRecord, object]:
        arm = ArmRecord(name=name, params=params)
        solver = MemEvoSolver(solver_cfg)

        def on_view(t, z, report):
            arm.add_view(report)
            if per_view_metrics:
                metrics, _ = self._score(z, labels)
                arm.add_metrics(f"view_{t}", metrics)

        self.logger.info(f"Arm '{name}': solving {len(views)} views with {params}")
        result = solver.run_stream(views, on_view=on_view)
        if labels is not None and not per_view_metrics:
            metrics, _ = self._score(result.representation, labels)
            arm.add_metrics('final', metrics)
        return arm, result

    def _require_labels(self, labels):
        if labels is None:
            raise ConfigError(f"experiment '{self.cfg.experiment}' reports metrics and needs a labels file")

    def run(self) -> RunManifest:
        cfg = self.cfg
        manifest = RunManifest(experiment=cfg.experiment, seed=cfg.seed, config=cfg.to_dict())
        handler = {
            'run': self._experiment_run,
            'ablation': self._experiment_ablation,
            'lambda-sweep': self._experiment_lambda_sweep,
            'view-curve': self._experiment_view_curve,
            'scaling': self._experiment_scaling,
            'param-grid': self._experiment_param_grid,
            'latent-sweep': self._experiment_latent_sweep,
        }[cfg.experiment]

        start = time.perf_counter()
        handler(manifest)
        manifest.summary['wall_time'] = time.perf_counter() - start

        write_manifest(manifest, self.output_dir)
        if cfg.database_url:
            RunRegistry(cfg.database_url).record_manifest(manifest)
        return manifest

    def _experiment_run(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        solver_cfg = self.cfg.solver
        arm = ArmRecord(name='memevo', params={'alpha': solver_cfg.alpha, 'beta': solver_cfg.beta,
                                               'lambda': solver_cfg.lam})
        result = MemEvoSolver(solver_cfg).run_stream(views, on_view=lambda t, z, report: arm.add_view(report))
        manifest.arms.append(arm)

        z_final = result.representation
        clusterings = kmeans(z_final, self.cfg.k, restarts=self.cfg.restarts, seed=self.cfg.seed)
        export_view(z_final, self.output_dir / "embedding.txt")
        export_labels(best_restart(clusterings).labels, self.output_dir / "predicted_labels.txt")
        result.store.save(self.output_dir / "memory")
        if labels is not None:
            arm.add_metrics('final', evaluate_labelings([res.labels for res in clusterings], labels))
        else:
            self.logger.info("No labels supplied; skipping metrics")

    def _experiment_ablation(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        self._require_labels(labels)
        for name, solver_cfg in ablation_arms(self.cfg.solver):
            params = {'alpha': solver_cfg.alpha, 'beta': solver_cfg.beta, 'lambda': solver_cfg.lam}
            arm, _ = self._run_arm(name, solver_cfg, views, labels, params)
            manifest.arms.append(arm)

    def _experiment_lambda_sweep(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        self._require_labels(labels)
        for lam in LAMBDA_GRID:
            arm, _ = self._run_arm(f"lambda_{lam:g}", self.cfg.solver.with_overrides(lam=lam), views, labels,
                                   {'lambda': lam})
            if lam == 0:
                arm.notes['uniform_averaging_baseline'] = True
            manifest.arms.append(arm)

    def _experiment_view_curve(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        self._require_labels(labels)
        arm, _ = self._run_arm('memevo', self.cfg.solver, views, labels, {'lambda': self.cfg.solver.lam},
                               per_view_metrics=True)
        manifest.arms.append(arm)
        manifest.summary['curve_acc'] = [metric['acc'] for metric in arm.metrics]

    def _experiment_scaling(self, manifest: RunManifest):
        if self.cfg.synth is None:
            raise ConfigError("the scaling experiment generates synthetic streams and cannot use view files")
        # tol = 0 pins every solve to the iteration cap
        solver_cfg = self.cfg.solver.with_overrides(tol=0.0)
        sizes = list(self.cfg.scaling_sizes)
        mean_times = []
        for size, (views, _) in zip(sizes, generate_scaling_series(self.cfg.synth, sizes)):
            arm, _ = self._run_arm(f"n_{size}", solver_cfg, views, None, {'n': size})
            mean_times.append(float(np.mean([view['wall_time'] for view in arm.views])))
            manifest.arms.append(arm)

        manifest.summary['sizes'] = sizes
        manifest.summary['mean_view_time'] = mean_times
        if len(sizes) >= 2:
            slope, _ = np.polyfit(np.log(sizes), np.log(mean_times), 1)
            manifest.summary['loglog_slope'] = float(slope)
            self.logger.info(f"Per-view wall time grows as n^{slope:.2f}")

    def _experiment_param_grid(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        self._require_labels(labels)
        for alpha in PARAM_GRID:
            for beta in PARAM_GRID:
                arm, _ = self._run_arm(f"alpha_{alpha:g}_beta_{beta:g}",
                                       self.cfg.solver.with_overrides(alpha=alpha, beta=beta),
                                       views, labels, {'alpha': alpha, 'beta': beta})
                manifest.arms.append(arm)

    def _experiment_latent_sweep(self, manifest: RunManifest):
        views, labels = load_stream(self.cfg)
        self._require_labels(labels)
        limit = min(min(view.shape) for view in views)
        for m in LATENT_GRID:
            if m > limit:
                self.logger.warning(f"Skipping latent_dim={m}: exceeds min(n, d_t)={limit}")
                continue
            arm, _ = self._run_arm(f"m_{m}", self.cfg.solver.with_overrides(latent_dim=m), views, labels,
                                   {'latent_dim': m})
            manifest.arms.append(arm)


def run_experiment(cfg: RunConfig) -> RunManifest:
    return ExperimentRunner(cfg).run()
