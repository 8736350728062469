from sqlalchemy import Boolean, Column, Float, ForeignKey, Integer, String
from sqlalchemy.orm import relationship

from data.database import Base


class ViewRecord(Base):
    __tablename__ = 'view_records'
    __table_args__ = {'extend_existing': True}

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)
    arm = Column(String, nullable=False)
    view_index = Column(Integer, nullable=False)
    iterations = Column(Integer, nullable=False)
    converged = Column(Boolean, default=False)
    recon_residual = Column(Float)
    tensor_residual = Column(Float)
    wall_time = Column(Float)

    run = relationship("Run", back_populates="view_records")

    def __repr__(self):
        return f"<ViewRecord(run={self.run_id}, arm='{self.arm}', view={self.view_index}, iters={self.iterations})>"
