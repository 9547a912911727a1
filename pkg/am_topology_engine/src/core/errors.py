"""
Exception hierarchy for the topology engine.

The CLI maps these onto process exit codes (see main.py).
"""
from typing import Optional


class TopologyEngineError(Exception):
    """Base class for all engine errors."""


class FrameMismatchError(TopologyEngineError, ValueError):
    """Operands disagree on dims, spacing or origin."""


class GridParseError(TopologyEngineError, ValueError):
    """Base class for voxel file parse failures."""


class MalformedHeaderError(GridParseError):
    """Missing magic, unknown keyword or unparsable header line."""


class DimensionOverflowError(GridParseError):
    """Declared dims exceed the configured voxel bound."""


class TruncatedStreamError(GridParseError):
    """Payload shorter (or longer) than the header promises."""


class DegenerateMmnError(TopologyEngineError, ValueError):
    """MMN parameters do not describe a usable neighborhood."""


class InvalidThresholdError(TopologyEngineError, ValueError):
    """Lambda outside [0, 1), unparsable, or a lambda list not strictly ascending."""


class PrecisionFailureError(TopologyEngineError):
    """FFT result could not be rounded to exact integer counts."""

    def __init__(self, message: str, max_deviation: float):
        super().__init__(message)
        self.max_deviation = max_deviation


class WorkBoundExceededError(TopologyEngineError):
    """Direct (brute-force) computation asked to do more work than allowed."""


class InternalConsistencyError(TopologyEngineError):
    """An invariant that must hold by construction failed."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
