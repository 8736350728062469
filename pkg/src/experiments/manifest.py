import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import jsonschema
import pandas as pd

from evaluation.clustering import MetricsReport
from optimizer.config import SolveReport

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
RESULTS_FILE = "results.csv"

_METRIC_SCHEMA = {
    "type": "object",
    "required": ["point", "acc", "nmi", "ari"],
    "properties": {
        "point": {"type": "string"},
        "acc": {"type": "number", "minimum": 0, "maximum": 1},
        "nmi": {"type": "number", "minimum": 0, "maximum": 1},
        "ari": {"type": "number", "minimum": -1, "maximum": 1},
        "per_restart": {"type": "object"},
    },
}

_VIEW_SCHEMA = {
    "type": "object",
    "required": ["view_index", "iterations", "converged", "recon_residual", "tensor_residual", "wall_time"],
    "properties": {
        "view_index": {"type": "integer", "minimum": 1},
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "wall_time": {"type": "number", "minimum": 0},
    },
}

MANIFEST_SCHEMA = {
    "type": "object",
    "required": ["experiment", "seed", "config", "arms"],
    "properties": {
        "experiment": {"type": "string"},
        "seed": {"type": "integer"},
        "config": {"type": "object"},
        "summary": {"type": "object"},
        "arms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "params", "views", "metrics"],
                "properties": {
                    "name": {"type": "string"},
                    "params": {"type": "object"},
                    "notes": {"type": "object"},
                    "views": {"type": "array", "items": _VIEW_SCHEMA},
                    "metrics": {"type": "array", "items": _METRIC_SCHEMA},
                },
            },
        },
    },
}


@dataclass
class ArmRecord:
    """One solver variant (or sweep point) of an experiment"""
    name: str
    params: Dict = field(default_factory=dict)
    views: List[Dict] = field(default_factory=list)
    metrics: List[Dict] = field(default_factory=list)
    notes: Dict = field(default_factory=dict)

    def add_view(self, report: SolveReport):
        self.views.append(report.summary())

    def add_metrics(self, point: str, report: MetricsReport):
        self.metrics.append({'point': point, **report.to_dict()})

    def to_dict(self) -> Dict:
        return {
            'name': self.name,
            'params': self.params,
            'notes': self.notes,
            'views': self.views,
            'metrics': self.metrics,
        }


@dataclass
class RunManifest:
    experiment: str
    seed: int
    config: Dict
    arms: List[ArmRecord] = field(default_factory=list)
    summary: Dict = field(default_factory=dict)
    output_dir: Optional[str] = None

    def arm(self, name: str) -> ArmRecord:
        for record in self.arms:
            if record.name == name:
                return record
        raise KeyError(name)

    def to_dict(self) -> Dict:
        return {
            'experiment': self.experiment,
            'seed': self.seed,
            'config': self.config,
            'summary': self.summary,
            'arms': [arm.to_dict() for arm in self.arms],
        }

    def results_frame(self) -> pd.DataFrame:
        """Plot-ready table: one row per (arm, evaluation point)"""
        rows = []
        for arm in self.arms:
            for metric in arm.metrics:
                rows.append({'arm': arm.name, **arm.params, 'point': metric['point'],
                             'acc': metric['acc'], 'nmi': metric['nmi'], 'ari': metric['ari']})
            if not arm.metrics:
                for view in arm.views:
                    rows.append({'arm': arm.name, **arm.params, 'view_index': view['view_index'],
                                 'iterations': view['iterations'], 'wall_time': view['wall_time']})
        return pd.DataFrame(rows)


def validate_manifest(document: Dict):
    jsonschema.validate(instance=document, schema=MANIFEST_SCHEMA)


def write_manifest(manifest: RunManifest, output_dir) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    document = manifest.to_dict()
    validate_manifest(document)

    path = output_dir / MANIFEST_FILE
    path.write_text(json.dumps(document, indent=2, sort_keys=True))
    manifest.results_frame().to_csv(output_dir / RESULTS_FILE, index=False)
    manifest.output_dir = str(output_dir)
    logger.info(f"Manifest written to {path}")
    return path


def read_manifest(path) -> Dict:
    document = json.loads(Path(path).read_text())
    validate_manifest(document)
    return document
