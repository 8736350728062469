# Import all models to ensure they are registered with SQLAlchemy
from .run import Run
from .view_record import ViewRecord
from .metric_record import MetricRecord

__all__ = [
    'Run',
    'ViewRecord',
    'MetricRecord',
]
