"""
Wall-clock stage timing.
"""
import time
import logging
from contextlib import contextmanager
from typing import Dict

logger = logging.getLogger(__name__)


class StageTimer:
    """Accumulates seconds per named stage."""

    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.timings[name] = self.timings.get(name, 0.0) + elapsed
            logger.debug(f"stage {name}: {elapsed:.3f}s")

    def merge(self, other: Dict[str, float], prefix: str = ""):
        for key, value in other.items():
            name = f"{prefix}{key}"
            self.timings[name] = self.timings.get(name, 0.0) + value

    @property
    def total(self) -> float:
        return sum(self.timings.values())

    def as_dict(self) -> Dict[str, float]:
        return {k: round(v, 6) for k, v in self.timings.items()}
