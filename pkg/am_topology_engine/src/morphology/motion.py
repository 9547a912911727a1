"""
Motion sets, sweeps and as-manufactured shapes.

A motion set keeps the translations whose overlap measure beats the
threshold (OM(t) > lambda * |B|); the as-manufactured shape is the sweep of
the MMN along it. Translations are confined to the design frame, and so is
the swept material.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:
    from ..core.config import resolve_workers  # type: ignore
    from ..measure.overlap import (  # type: ignore
        OverlapField, exact_convolution, overlap_field_fft, shifted,
    )
    from ..voxel.grid import VoxelGrid, require_same_frame  # type: ignore
    from ..voxel.mmn import mmn_center, mmn_offsets  # type: ignore
    from .omrt import OmrtField  # type: ignore
    from .thresholds import (  # type: ignore
        LambdaLike, as_fraction, check_ascending, count_threshold, full_containment_lambda,
    )
except Exception:
    from src.core.config import resolve_workers  # type: ignore
    from src.measure.overlap import (  # type: ignore
        OverlapField, exact_convolution, overlap_field_fft, shifted,
    )
    from src.voxel.grid import VoxelGrid, require_same_frame  # type: ignore
    from src.voxel.mmn import mmn_center, mmn_offsets  # type: ignore
    from src.morphology.omrt import OmrtField  # type: ignore
    from src.morphology.thresholds import (  # type: ignore
        LambdaLike, as_fraction, check_ascending, count_threshold, full_containment_lambda,
    )

logger = logging.getLogger(__name__)

# Float slack around lambda* * |B| inside which the comparison is redone exactly.
NEAR_TIE = 1e-6


@dataclass(frozen=True)
class MotionSet:
    """Admissible translations plus the threshold that produced them."""

    grid: VoxelGrid
    lam: Optional[Fraction] = None
    omrt: Optional[OmrtField] = None

    @property
    def size(self) -> int:
        return self.grid.volume


def _frame_grid(field: OverlapField, occupancy: np.ndarray, frame: Optional[VoxelGrid]) -> VoxelGrid:
    if frame is not None:
        if frame.dims != field.dims:
            raise ValueError(f"frame dims {frame.dims} != field dims {field.dims}")
        return frame.with_occupancy(occupancy)
    return VoxelGrid(occupancy)


def motion_set(field: OverlapField, lam: LambdaLike,
               frame: Optional[VoxelGrid] = None) -> MotionSet:
    """Translations with OM(t) > lam * |B|, compared exactly.

    Args:
        field: Overlap field.
        lam: Threshold in [0, 1).
        frame: Grid whose spacing/origin the motion set should carry.
    """
    lam = as_fraction(lam)
    k = count_threshold(lam, field.mmn_measure)
    return MotionSet(_frame_grid(field, field.values > k, frame), lam=lam)


def motion_set_nonuniform(field: OverlapField, omrt: OmrtField,
                          frame: Optional[VoxelGrid] = None) -> MotionSet:
    """Translations with OM(t) > lambda*(t) * |B|.

    Where no bump is active the comparison is the exact one against lambda_0.
    Inside bump supports lambda* is evaluated in float64, and counts within
    NEAR_TIE of lambda* * |B| are decided exactly by OmrtField.admits.
    """
    k = count_threshold(omrt.clamped_base, field.mmn_measure)
    occ = field.values > k
    if omrt.bumps:
        active = omrt.support_mask(field.dims)
        if active.any():
            lam = omrt.evaluate(field.dims)
            bound = lam * field.mmn_measure
            local = field.values > bound
            near = active & (np.abs(field.values - bound) < NEAR_TIE)
            for point in zip(*np.nonzero(near)):
                point = tuple(int(p) for p in point)
                local[point] = omrt.admits(point, int(field.values[point]), field.mmn_measure)
            if near.any():
                logger.debug(f"Resolved {int(near.sum())} near-tie translations exactly")
            occ = np.where(active, local, occ)
    return MotionSet(_frame_grid(field, occ, frame), lam=None if omrt.bumps else omrt.base, omrt=omrt)


def sweep(motion: MotionSet, mmn: VoxelGrid) -> VoxelGrid:
    """Minkowski sum of the motion set and the MMN, clipped to the frame."""
    translations = motion.grid
    if translations.ndim != mmn.ndim:
        raise ValueError("motion set and MMN differ in ndim")
    if translations.is_empty:
        return translations.empty_like()
    center = mmn_center(mmn)
    counts, _ = exact_convolution(translations.occupancy, mmn.occupancy, center,
                                  translations.dims, upper=mmn.volume)
    return translations.with_occupancy(counts >= 1)


def sweep_direct(motion: MotionSet, mmn: VoxelGrid) -> VoxelGrid:
    """Union of translated MMN copies, one shift per MMN voxel."""
    translations = motion.grid.occupancy
    out = np.zeros(translations.shape, dtype=bool)
    for offset in mmn_offsets(mmn):
        out |= shifted(translations, -offset)
    return motion.grid.with_occupancy(out)


def as_manufactured(design: VoxelGrid, mmn: VoxelGrid, lam: LambdaLike,
                    field: Optional[OverlapField] = None) -> VoxelGrid:
    """sweep(motion_set(overlap_field(design, mmn), lam), mmn)."""
    field = field or overlap_field_fft(design, mmn)
    return sweep(motion_set(field, lam, frame=design), mmn)


def as_manufactured_nonuniform(design: VoxelGrid, mmn: VoxelGrid, omrt: OmrtField,
                               field: Optional[OverlapField] = None) -> VoxelGrid:
    field = field or overlap_field_fft(design, mmn)
    return sweep(motion_set_nonuniform(field, omrt, frame=design), mmn)


def family(design: VoxelGrid, mmn: VoxelGrid, lambdas: Sequence[LambdaLike],
           field: Optional[OverlapField] = None,
           workers: Optional[int] = None) -> List[Tuple[Fraction, VoxelGrid]]:
    """As-manufactured shapes for ascending lambdas, sharing one overlap field.

    Members are nested: a larger lambda gives a subset of a smaller one's shape.
    """
    lams = [as_fraction(lam) for lam in lambdas]
    check_ascending(lams)
    field = field or overlap_field_fft(design, mmn)

    def member(lam: Fraction) -> VoxelGrid:
        return sweep(motion_set(field, lam, frame=design), mmn)

    n = resolve_workers(workers)
    if n > 1 and len(lams) > 1:
        with ThreadPoolExecutor(max_workers=min(n, len(lams))) as pool:
            shapes = list(pool.map(member, lams))
    else:
        shapes = [member(lam) for lam in lams]
    logger.info(f"Family of {len(lams)} members over dims {design.dims}")
    return list(zip(lams, shapes))


def extreme_min_ud(design: VoxelGrid, mmn: VoxelGrid,
                   field: Optional[OverlapField] = None) -> VoxelGrid:
    """lambda -> 1 limit: translations fully inside the design, swept (the opening)."""
    field = field or overlap_field_fft(design, mmn)
    return sweep(motion_set(field, full_containment_lambda(field.mmn_measure), frame=design), mmn)


def extreme_max_od(design: VoxelGrid, mmn: VoxelGrid,
                   field: Optional[OverlapField] = None) -> VoxelGrid:
    """lambda = 0 limit: every translation touching the design, swept."""
    field = field or overlap_field_fft(design, mmn)
    return sweep(motion_set(field, Fraction(0), frame=design), mmn)


def symmetric_difference_volume(design: VoxelGrid, shape: VoxelGrid) -> int:
    require_same_frame(design, shape)
    return int(np.count_nonzero(design.occupancy ^ shape.occupancy))
