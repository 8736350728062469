import logging
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional

import toml
from dotenv import load_dotenv

from data.datagen import SynthSpec
from optimizer.config import SolverConfig
from optimizer.exceptions import ConfigError

logger = logging.getLogger(__name__)

EXPERIMENTS = ('run', 'ablation', 'lambda-sweep', 'view-curve', 'scaling', 'param-grid', 'latent-sweep')
DEFAULT_SCALING_SIZES = [1000, 2000, 4000, 8000]

# config-file keys that differ from the dataclass field names
_SOLVER_KEYS = {f.name: f.name for f in fields(SolverConfig)}
_SOLVER_KEYS['lambda'] = 'lam'
_SOLVER_KEYS.pop('lam')
_SYNTH_KEYS = {'n', 'latent_dim_true', 'view_dims', 'noise_sigma', 'cluster_separation'}
_RUN_KEYS = {'views', 'labels', 'synth', 'k', 'restarts', 'output_dir', 'experiment', 'stale_factor',
             'scaling_sizes', 'database_url', 'log_level'}


@dataclass
class RunConfig:
    """Everything one CLI invocation needs"""
    experiment: str = 'run'
    view_paths: List[str] = field(default_factory=list)
    synth: Optional[SynthSpec] = None
    labels_path: Optional[str] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    k: int = 3
    restarts: int = 10
    output_dir: str = 'memevo_output'
    stale_factor: Optional[float] = None
    scaling_sizes: List[int] = field(default_factory=lambda: list(DEFAULT_SCALING_SIZES))
    database_url: Optional[str] = None
    log_level: str = 'INFO'

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{self.experiment}', expected one of {', '.join(EXPERIMENTS)}")
        if bool(self.view_paths) == (self.synth is not None):
            raise ConfigError("exactly one of view files or a synthetic stream must be given")
        if self.k < 2:
            raise ConfigError(f"k must be at least 2, got {self.k}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be positive, got {self.restarts}")
        if self.synth is not None and self.synth.k != self.k:
            raise ConfigError(f"synthetic stream plants {self.synth.k} clusters but k={self.k}")
        if self.stale_factor is not None and self.stale_factor < 1:
            raise ConfigError(f"stale_factor must be at least 1, got {self.stale_factor}")

    @property
    def seed(self) -> int:
        return self.solver.seed

    def to_dict(self) -> Dict:
        return {
            'experiment': self.experiment,
            'view_paths': list(self.view_paths),
            'synth': self.synth.to_dict() if self.synth else None,
            'labels_path': self.labels_path,
            'solver': asdict(self.solver),
            'k': self.k,
            'restarts': self.restarts,
            'output_dir': self.output_dir,
            'stale_factor': self.stale_factor,
            'scaling_sizes': list(self.scaling_sizes),
        }


def _read_config_file(config_path) -> Dict:
    try:
        values = toml.load(Path(config_path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {config_path}")
    except toml.TomlDecodeError as e:
        raise ConfigError(f"cannot parse config file {config_path}: {e}")
    nested = [key for key, value in values.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(f"config file must be flat key = value pairs, found tables {nested}")
    return values


def _env_defaults() -> Dict:
    load_dotenv()
    values = {}
    if os.getenv("MEMEVO_OUTPUT_DIR"):
        values['output_dir'] = os.getenv("MEMEVO_OUTPUT_DIR")
    if os.getenv("MEMEVO_DATABASE_URL"):
        values['database_url'] = os.getenv("MEMEVO_DATABASE_URL")
    if os.getenv("MEMEVO_LOG_LEVEL"):
        values['log_level'] = os.getenv("MEMEVO_LOG_LEVEL")
    return values


def build_run_config(config_path=None, overrides: Optional[Dict] = None) -> RunConfig:
    """
    Merge settings: environment defaults, then the flat TOML file, then the
    explicit overrides (CLI flags). None-valued overrides are ignored.
    """
    values = _env_defaults()
    if config_path:
        values.update(_read_config_file(config_path))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})

    unknown = set(values) - set(_SOLVER_KEYS) - _SYNTH_KEYS - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")

    solver_values = {field_name: values[key] for key, field_name in _SOLVER_KEYS.items() if key in values}
    solver = SolverConfig(**solver_values)

    k = int(values.get('k', 3))
    synth = None
    view_paths = [str(p) for p in values.get('views', [])]
    synth_requested = values.get('synth', not view_paths)
    if synth_requested and view_paths:
        raise ConfigError("view files and a synthetic stream were both requested")
    if synth_requested:
        defaults = SynthSpec()
        synth = SynthSpec(
            n=int(values.get('n', defaults.n)),
            k=k,
            latent_dim_true=int(values.get('latent_dim_true', defaults.latent_dim_true)),
            view_dims=[int(d) for d in values.get('view_dims', defaults.view_dims)],
            noise_sigma=[float(s) for s in values.get('noise_sigma', defaults.noise_sigma)],
            cluster_separation=float(values.get('cluster_separation', defaults.cluster_separation)),
            seed=solver.seed,
        )
        if len(synth.noise_sigma) == 1 and len(synth.view_dims) > 1:
            synth.noise_sigma = synth.noise_sigma * len(synth.view_dims)

    cfg = RunConfig(
        experiment=values.get('experiment', 'run'),
        view_paths=view_paths,
        synth=synth,
        labels_path=values.get('labels'),
        solver=solver,
        k=k,
        restarts=int(values.get('restarts', 10)),
        output_dir=str(values.get('output_dir', 'memevo_output')),
        stale_factor=values.get('stale_factor'),
        scaling_sizes=[int(s) for s in values.get('scaling_sizes', DEFAULT_SCALING_SIZES)],
        database_url=values.get('database_url'),
        log_level=str(values.get('log_level', 'INFO')).upper(),
    )
    logger.debug(f"Run configuration: {cfg.to_dict()}")
    return cfg
