# app/models/run.py

from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from app.db.database import Base


class Run(Base):
    __tablename__ = "runs"

    id          = Column(Integer, primary_key=True, index=True)
    kind        = Column(String, nullable=False)            # "experiment" | "oracle"
    seed        = Column(Integer, nullable=False)
    config_hash = Column(String(64), nullable=False, index=True)
    created_at  = Column(DateTime, nullable=False, default=datetime.utcnow)
    manifest    = Column(Text, nullable=False)

    densities   = relationship("DensityResult", back_populates="run", cascade="all, delete-orphan")
    oracle_runs = relationship("OracleRun", back_populates="run", cascade="all, delete-orphan")


class DensityResult(Base):
    __tablename__ = "density_results"

    id                     = Column(Integer, primary_key=True, index=True)
    run_id                 = Column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    m                      = Column(Integer, nullable=False)
    c_mue_final            = Column(Float, nullable=False)
    min_fue_capacity       = Column(Float, nullable=False)
    sum_capacity           = Column(Float, nullable=False)
    jain                   = Column(Float, nullable=False)
    iterations_to_converge = Column(Integer, nullable=False)
    converged              = Column(Boolean, nullable=False)
    qos_satisfied          = Column(Boolean, nullable=False)
    elapsed_seconds        = Column(Float, nullable=True)
    q_table_entries        = Column(Integer, nullable=True)
    joint_actions_log2     = Column(Float, nullable=True)

    run = relationship("Run", back_populates="densities")


class OracleRun(Base):
    __tablename__ = "oracle_runs"

    id               = Column(Integer, primary_key=True, index=True)
    run_id           = Column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    m                = Column(Integer, nullable=False)
    n_power          = Column(Integer, nullable=False)
    joint_actions    = Column(Integer, nullable=False)
    best_action      = Column(String, nullable=False)
    best_objective   = Column(Float, nullable=False)
    feasible         = Column(Boolean, nullable=False)
    optimality_gap   = Column(Float, nullable=True)

    run = relationship("Run", back_populates="oracle_runs")
