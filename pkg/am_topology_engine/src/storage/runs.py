"""
Run registry: one row per recorded CLI invocation.
"""
import logging
import uuid
from typing import List, Optional

from sqlalchemy import select

try:
    from ..orchestration.reports import RunManifest  # type: ignore
    from .db import get_db_session  # type: ignore
    from .models import RunRecord, RunSummary  # type: ignore
except Exception:
    from src.orchestration.reports import RunManifest  # type: ignore
    from src.storage.db import get_db_session  # type: ignore
    from src.storage.models import RunRecord, RunSummary  # type: ignore

logger = logging.getLogger(__name__)

STATUS_BY_EXIT = {0: "OK", 5: "NOT_CLEAN"}


def record_run(manifest: RunManifest, output_dir: Optional[str] = None,
               db_url: Optional[str] = None) -> str:
    """Store a finished run. Returns the new run_id."""
    run_id = str(uuid.uuid4())
    session = get_db_session(db_url)
    try:
        session.add(RunRecord(
            run_id=run_id,
            command=manifest.command,
            started_at=manifest.started_at,
            exit_code=manifest.exit_code,
            status=STATUS_BY_EXIT.get(manifest.exit_code, "FAILED"),
            output_dir=output_dir,
            input_hash=next(iter(manifest.input_hashes.values()), None),
            manifest_json=manifest.model_dump_json(),
        ))
        session.commit()
        logger.info(f"Run {run_id} recorded ({manifest.command}, exit {manifest.exit_code})")
        return run_id
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def recent_runs(limit: int = 20, db_url: Optional[str] = None) -> List[RunSummary]:
    """Most recent runs first."""
    session = get_db_session(db_url)
    try:
        rows = session.execute(
            select(RunRecord).order_by(RunRecord.started_at.desc(), RunRecord.id.desc()).limit(limit)
        ).scalars().all()
        return [RunSummary.model_validate(row) for row in rows]
    finally:
        session.close()
