from sqlalchemy import Column, Float, ForeignKey, Integer, String
from sqlalchemy.orm import relationship

from data.database import Base


class MetricRecord(Base):
    __tablename__ = 'metric_records'
    __table_args__ = {'extend_existing': True}

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)
    point = Column(String, nullable=False)
    acc = Column(Float, nullable=False)
    nmi = Column(Float, nullable=False)
    ari = Column(Float, nullable=False)

    run = relationship("Run", back_populates="metric_records")

    def __repr__(self):
        return f"<MetricRecord(run={self.run_id}, point='{self.point}', acc={self.acc:.4f})>"
