"""
Configuration management for the topology engine.
Every knob is an environment variable (optionally from a .env file).
"""
import os
from fractions import Fraction
from pathlib import Path
from dotenv import load_dotenv
import logging

load_dotenv()
logger = logging.getLogger(__name__)


class Settings:
    """Settings class with validation for engine limits and defaults."""

    # Paths
    DATA_DIR: str = os.getenv("DATA_DIR", "./data")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Parallelism (per-feature, per-slice and per-lambda fan-out)
    WORKERS: int = int(os.getenv("WORKERS", os.cpu_count() or 1))

    # Numerics
    FFT_MAX_DEVIATION: float = float(os.getenv("FFT_MAX_DEVIATION", 0.5))
    DIRECT_WORK_LIMIT: int = int(os.getenv("DIRECT_WORK_LIMIT", 500_000_000))
    MAX_GRID_VOXELS: int = int(os.getenv("MAX_GRID_VOXELS", 2**31))

    # Threshold defaults
    DEFAULT_LAMBDA: str = os.getenv("DEFAULT_LAMBDA", "0.95")

    # Corrector defaults
    CORRECTION_STEP: str = os.getenv("CORRECTION_STEP", "1/16")
    CORRECTION_MAX_ITERS: int = int(os.getenv("CORRECTION_MAX_ITERS", 20))
    CORRECTION_BUDGET: float = float(os.getenv("CORRECTION_BUDGET", 0.25))

    # Run registry
    RECORD_RUNS: bool = os.getenv("RECORD_RUNS", "false").lower() in ("1", "true", "yes", "y")
    DATABASE_URL: str = os.getenv(
        "DATABASE_URL",
        f"sqlite:///{Path(os.getenv('DATA_DIR', './data')) / 'runs.sqlite'}",
    )

    @classmethod
    def validate(cls):
        """Validate numeric limits and make sure the data directory exists."""
        Path(cls.DATA_DIR).mkdir(parents=True, exist_ok=True)

        if cls.WORKERS < 1:
            raise ValueError(f"WORKERS must be >= 1, got {cls.WORKERS}")
        if cls.FFT_MAX_DEVIATION <= 0 or cls.FFT_MAX_DEVIATION > 0.5:
            raise ValueError(f"FFT_MAX_DEVIATION must be in (0, 0.5], got {cls.FFT_MAX_DEVIATION}")
        if cls.DIRECT_WORK_LIMIT < 1 or cls.MAX_GRID_VOXELS < 1:
            raise ValueError("DIRECT_WORK_LIMIT and MAX_GRID_VOXELS must be positive")
        logger.debug("✓ Numeric limits validated")

        lam = Fraction(cls.DEFAULT_LAMBDA)
        if not 0 <= lam < 1:
            raise ValueError(f"DEFAULT_LAMBDA must be in [0, 1), got {cls.DEFAULT_LAMBDA}")
        if Fraction(cls.CORRECTION_STEP) <= 0:
            raise ValueError(f"CORRECTION_STEP must be positive, got {cls.CORRECTION_STEP}")
        if cls.CORRECTION_MAX_ITERS < 0 or cls.CORRECTION_BUDGET < 0:
            raise ValueError("CORRECTION_MAX_ITERS and CORRECTION_BUDGET must be non-negative")
        logger.debug("✓ Threshold and corrector defaults validated")

        return True

    @classmethod
    def log_path(cls) -> Path:
        """Location of the engine log file."""
        return Path(cls.DATA_DIR) / "engine.log"


def get_settings() -> type:
    """Get the validated settings class."""
    Settings.validate()
    return Settings


def resolve_workers(workers=None) -> int:
    """Worker count for a parallel stage, falling back to Settings.WORKERS."""
    n = Settings.WORKERS if workers is None else int(workers)
    return max(1, n)
