"""
snnbench - SQLAlchemy ORM Models
Tables for experiments, their sweep cells, NAS evaluations and HIL traces.
"""

from datetime import datetime

from sqlalchemy import (
    JSON,
    Boolean,
    Column,
    DateTime,
    Float,
    ForeignKey,
    Integer,
    String,
    Text,
)
from sqlalchemy.orm import relationship

from .database import Base


class Experiment(Base):
    """One stored experiment and the specification that produced it."""

    __tablename__ = "experiments"

    id = Column(Integer, primary_key=True, autoincrement=True)
    name = Column(String(200), nullable=False, index=True)
    network = Column(String(500))
    platform = Column(String(200))
    seed = Column(Integer)
    spec = Column(JSON)
    source_file = Column(String(1000))
    created_at = Column(DateTime, default=datetime.utcnow)

    results = relationship(
        "RunResultRow", back_populates="experiment", cascade="all, delete-orphan"
    )

    def __repr__(self):
        return f"<Experiment(name='{self.name}', platform='{self.platform}')>"


class RunResultRow(Base):
    """One sweep cell of an experiment."""

    __tablename__ = "run_results"

    id = Column(Integer, primary_key=True)
    experiment_id = Column(Integer, ForeignKey("experiments.id"), nullable=False)
    network = Column(String(500))
    platform = Column(String(200))
    cell = Column(JSON)
    accuracy = Column(Float)
    accuracy_std = Column(Float)
    ann_accuracy = Column(Float)
    conversion_loss = Column(Float)
    wall_clock_ms = Column(Float)
    energy_mj = Column(Float)
    batch_size = Column(Integer)
    instances = Column(Integer)
    repetitions = Column(Integer)
    hil = Column(Boolean)
    error = Column(Text)

    experiment = relationship("Experiment", back_populates="results")


class NasEvaluation(Base):
    """One genome of one search generation."""

    __tablename__ = "nas_evaluations"

    id = Column(Integer, primary_key=True)
    search = Column(String(200), index=True)
    generation = Column(Integer, nullable=False)
    slot = Column(Integer)
    genome_hash = Column(String(32), index=True)
    dims = Column(JSON)
    edges = Column(JSON)
    sequential = Column(Boolean)
    accuracy = Column(Float)
    neurons = Column(Integer)
    elite = Column(Boolean)


class HilEpochRow(Base):
    """Device accuracy after one retraining epoch."""

    __tablename__ = "hil_epochs"

    id = Column(Integer, primary_key=True)
    run = Column(String(200), index=True)
    profile = Column(String(200))
    device_seed = Column(Integer)
    epoch = Column(Integer, nullable=False)
    device_accuracy = Column(Float)
    loss = Column(Float)
