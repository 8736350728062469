from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Integer, String, Text
from sqlalchemy.orm import relationship

from data.database import Base


class Run(Base):
    __tablename__ = 'runs'
    __table_args__ = {'extend_existing': True}

    id = Column(Integer, primary_key=True)
    experiment = Column(String, nullable=False)
    seed = Column(Integer, nullable=False)
    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))
    output_dir = Column(String)
    config_json = Column(Text, nullable=False)

    view_records = relationship("ViewRecord", back_populates="run", cascade="all, delete-orphan")
    metric_records = relationship("MetricRecord", back_populates="run", cascade="all, delete-orphan")

    def __repr__(self):
        return f"<Run(id={self.id}, experiment='{self.experiment}', seed={self.seed})>"
