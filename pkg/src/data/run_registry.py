# run_registry.py
import json
import logging

from sqlalchemy.orm import Session

from data.database import make_session_factory
from models import MetricRecord, Run, ViewRecord


class RunRegistry:
    """Stores experiment manifests in a relational database"""

    def __init__(self, database_url: str):
        self.database_url = database_url
        self.SessionLocal = make_session_factory(database_url)
        self.logger = logging.getLogger(__name__)

    def record_manifest(self, manifest) -> int:
        """Insert one run with its per-view and per-point records; returns the run id"""
        with self.SessionLocal() as session:
            try:
                run = self._add_run(session, manifest)
                session.commit()
                self.logger.info(f"Run {run.id} ({manifest.experiment}) recorded in registry")
                return run.id
            except Exception as e:
                self.logger.error(f"Error recording run in registry: {e}")
                session.rollback()
                raise

    def _add_run(self, session: Session, manifest) -> Run:
        run = Run(
            experiment=manifest.experiment,
            seed=manifest.seed,
            output_dir=manifest.output_dir,
            config_json=json.dumps(manifest.config, sort_keys=True),
        )
        for arm in manifest.arms:
            for view in arm.views:
                run.view_records.append(ViewRecord(
                    arm=arm.name,
                    view_index=view['view_index'],
                    iterations=view['iterations'],
                    converged=view['converged'],
                    recon_residual=view['recon_residual'],
                    tensor_residual=view['tensor_residual'],
                    wall_time=view['wall_time'],
                ))
            for metric in arm.metrics:
                run.metric_records.append(MetricRecord(
                    point=f"{arm.name}/{metric['point']}",
                    acc=metric['acc'],
                    nmi=metric['nmi'],
                    ari=metric['ari'],
                ))
        session.add(run)
        session.flush()
        return run

    def list_runs(self, experiment: str = None):
        with self.SessionLocal() as session:
            query = session.query(Run)
            if experiment:
                query = query.filter_by(experiment=experiment)
            runs = query.order_by(Run.id).all()
            return [
                {
                    'id': run.id,
                    'experiment': run.experiment,
                    'seed': run.seed,
                    'views': len(run.view_records),
                    'metrics': {rec.point: rec.acc for rec in run.metric_records},
                }
                for run in runs
            ]
