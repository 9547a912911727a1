"""
Database initialization and connection management for the run registry.
"""
from pathlib import Path
from typing import Dict, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

try:
    from ..core.config import Settings  # type: ignore
    from .models import Base  # type: ignore
except Exception:
    from src.core.config import Settings  # type: ignore
    from src.storage.models import Base  # type: ignore

_engines: Dict[str, Engine] = {}


def get_engine(db_url: Optional[str] = None) -> Engine:
    """Engine for `db_url` (default Settings.DATABASE_URL), created once per URL."""
    db_url = db_url or Settings.DATABASE_URL
    if db_url.startswith("postgres://"):
        db_url = db_url.replace("postgres://", "postgresql://", 1)
    if db_url not in _engines:
        if db_url.startswith("sqlite:///"):
            Path(db_url[len("sqlite:///"):]).parent.mkdir(parents=True, exist_ok=True)
            _engines[db_url] = create_engine(db_url, connect_args={"check_same_thread": False})
        else:
            _engines[db_url] = create_engine(db_url, pool_pre_ping=True)
    return _engines[db_url]


def init_database(db_url: Optional[str] = None) -> Engine:
    """Create the registry tables if they do not exist."""
    engine = get_engine(db_url)
    Base.metadata.create_all(engine)
    return engine


def get_db_session(db_url: Optional[str] = None) -> Session:
    """Get database session directly."""
    engine = init_database(db_url)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)()
