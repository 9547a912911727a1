"""
Pydantic models and SQLAlchemy ORM models for the run registry.
"""
from datetime import datetime
from typing import Optional
from pydantic import BaseModel, ConfigDict
from sqlalchemy import Column, DateTime, Integer, String, Text
from sqlalchemy.orm import declarative_base

Base = declarative_base()


# ==================== Pydantic Models ====================

class RunSummary(BaseModel):
    """One row of `main.py runs`."""
    model_config = ConfigDict(from_attributes=True)

    run_id: str
    command: str
    started_at: datetime
    exit_code: int
    status: str  # "OK", "NOT_CLEAN", "FAILED"
    output_dir: Optional[str] = None
    input_hash: Optional[str] = None


# ==================== SQLAlchemy ORM Models ====================

class RunRecord(Base):
    """Recorded CLI runs."""
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(36), unique=True, nullable=False)
    command = Column(String(20), nullable=False, index=True)
    started_at = Column(DateTime, nullable=False, index=True)
    finished_at = Column(DateTime, default=datetime.utcnow)
    exit_code = Column(Integer, nullable=False, default=0)
    status = Column(String(20), nullable=False)
    output_dir = Column(Text)
    input_hash = Column(String(64))  # sha256 of the first input
    manifest_json = Column(Text)  # full RunManifest
