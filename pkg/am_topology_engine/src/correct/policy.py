"""
Correction policy: configuration and the OMRT update rule.

Each non-simple UD feature lowers the threshold around its centroid (more
translations admitted, material restored); each non-simple OD feature raises
it (fewer translations, material removed).
"""
import logging
from fractions import Fraction
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

try:
    from ..core.config import Settings  # type: ignore
    from ..cta.ledger import CtaReport  # type: ignore
    from ..morphology.omrt import OmrtField  # type: ignore
    from ..morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
    from ..voxel.mmn import circumradius  # type: ignore
except Exception:
    from src.core.config import Settings  # type: ignore
    from src.cta.ledger import CtaReport  # type: ignore
    from src.morphology.omrt import OmrtField  # type: ignore
    from src.morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.voxel.mmn import circumradius  # type: ignore

logger = logging.getLogger(__name__)


class CorrectionConfig(BaseModel):
    """Knobs of the correction loop.

    Lambdas and the step are exact rationals; JSON carries them as 'p/q' strings.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    initial_lambda: Fraction = Field(default_factory=lambda: as_fraction(Settings.DEFAULT_LAMBDA))
    step: Fraction = Field(default_factory=lambda: Fraction(Settings.CORRECTION_STEP))
    max_iters: int = Field(default_factory=lambda: Settings.CORRECTION_MAX_ITERS, ge=0)
    deviation_budget: float = Field(default_factory=lambda: Settings.CORRECTION_BUDGET, ge=0)
    radius_padding: float = Field(default=0.0, ge=0)

    @field_validator("initial_lambda", mode="before")
    @classmethod
    def _parse_lambda(cls, value):
        return as_fraction(value if not isinstance(value, float) else str(value))

    @field_validator("step", mode="before")
    @classmethod
    def _parse_step(cls, value):
        step = Fraction(str(value)) if not isinstance(value, Fraction) else value
        if step <= 0:
            raise ValueError(f"step must be positive, got {step}")
        return step

    @field_serializer("initial_lambda", "step")
    def _dump_fraction(self, value: Fraction) -> str:
        return format_lambda(value)


def bump_center(centroid) -> tuple:
    """Nearest lattice point to a centroid (halves round up)."""
    return tuple(int(np.floor(c + 0.5)) for c in centroid)


def adjust_omrt(omrt: OmrtField, report: CtaReport, cfg: CorrectionConfig,
                mmn: VoxelGrid) -> OmrtField:
    """One bump per non-simple feature: -step at UD centroids, +step at OD centroids.

    Bump radius is the feature's bounding radius plus the MMN circumradius.
    Bumps landing on an existing center add to its coefficient.
    """
    reach = circumradius(mmn) + cfg.radius_padding
    updated = omrt
    for feature in report.nonsimple_ud:
        updated = updated.with_bump(bump_center(feature.centroid),
                                    feature.bounding_radius + reach, -cfg.step)
    for feature in report.nonsimple_od:
        updated = updated.with_bump(bump_center(feature.centroid),
                                    feature.bounding_radius + reach, cfg.step)
    logger.debug(
        f"OMRT adjusted: {len(report.nonsimple_ud)} UD / {len(report.nonsimple_od)} OD bumps, "
        f"{updated.term_count} terms"
    )
    return updated


def describe_config(cfg: Optional[CorrectionConfig]) -> dict:
    return (cfg or CorrectionConfig()).model_dump(mode="json")
