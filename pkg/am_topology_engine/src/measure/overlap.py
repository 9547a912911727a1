"""
Overlap measure (OM) between a design and every lattice translation of an MMN.

For a translation t, OM(t) = |D ∩ (t + B)| where t + B places the MMN
reference voxel at t. Over the whole lattice this is the cross-correlation
of the design indicator with the MMN indicator, computed by FFT and rounded
to exact integer counts.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

try:
    from ..core.config import Settings  # type: ignore
    from ..core.errors import PrecisionFailureError, WorkBoundExceededError  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
    from ..voxel.mmn import mmn_center, mmn_offsets  # type: ignore
except Exception:
    from src.core.config import Settings  # type: ignore
    from src.core.errors import PrecisionFailureError, WorkBoundExceededError  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.voxel.mmn import mmn_center, mmn_offsets  # type: ignore

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OverlapField:
    """Integer overlap counts over the translation lattice.

    Attributes:
        values: int64 array with the design dims; values[t] = OM(t).
        mmn_measure: |B|, the MMN voxel count.
        max_deviation: largest |raw - rounded| seen while rounding FFT output
            (0.0 for direct computation).
        method: 'fft' or 'direct'.
    """

    values: np.ndarray
    mmn_measure: int
    max_deviation: float = 0.0
    method: str = "fft"

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(self.values.shape)

    def omr_at(self, index: Sequence[int]) -> Fraction:
        """Exact overlap measure ratio at one translation."""
        return Fraction(int(self.values[tuple(index)]), self.mmn_measure)


@dataclass(frozen=True, eq=False)
class OmrField:
    """Overlap measure ratio carried as exact numerator/denominator pairs."""

    numerators: np.ndarray
    denominator: int

    def at(self, index: Sequence[int]) -> Fraction:
        return Fraction(int(self.numerators[tuple(index)]), self.denominator)

    def as_float(self) -> np.ndarray:
        return self.numerators / float(self.denominator)


def _validate_pair(design: VoxelGrid, mmn: VoxelGrid):
    if design.ndim != mmn.ndim:
        raise ValueError(f"design is {design.ndim}D but MMN is {mmn.ndim}D")
    if mmn.is_empty:
        raise ValueError("MMN must be nonempty")


def exact_convolution(image: np.ndarray, kernel: np.ndarray, crop_start: Sequence[int],
                      out_shape: Sequence[int], max_deviation: Optional[float] = None,
                      upper: Optional[int] = None) -> Tuple[np.ndarray, float]:
    """Full linear convolution of two 0/1 arrays by FFT, cropped and rounded.

    Args:
        image, kernel: 0/1 arrays of equal ndim.
        crop_start: Index into the full convolution where the output begins.
        out_shape: Output shape.
        max_deviation: Precision limit (defaults to Settings.FFT_MAX_DEVIATION).
        upper: Largest legal count (values outside [0, upper] are a precision failure).

    Returns:
        (int64 counts, max rounding deviation)

    Raises:
        PrecisionFailureError: rounding is ambiguous or a count is out of range.
    """
    limit = Settings.FFT_MAX_DEVIATION if max_deviation is None else max_deviation
    full = fftconvolve(image.astype(np.float64), kernel.astype(np.float64), mode="full")
    region = full[tuple(slice(s, s + n) for s, n in zip(crop_start, out_shape))]
    rounded = np.rint(region)
    deviation = float(np.abs(region - rounded).max()) if region.size else 0.0
    if deviation >= limit:
        raise PrecisionFailureError(
            f"FFT rounding deviation {deviation:.3g} reaches the limit {limit}", deviation)
    counts = rounded.astype(np.int64)
    if counts.size and (counts.min() < 0 or (upper is not None and counts.max() > upper)):
        raise PrecisionFailureError(
            f"FFT counts fall outside [0, {upper}]: min {counts.min()}, max {counts.max()}",
            deviation)
    return counts, deviation


def overlap_field_fft(design: VoxelGrid, mmn: VoxelGrid,
                      max_deviation: Optional[float] = None) -> OverlapField:
    """OM over the design-frame translation lattice, via FFT.

    Args:
        design: Design grid (may be empty).
        mmn: Nonempty MMN grid with the same ndim.
        max_deviation: Precision limit override.

    Returns:
        OverlapField with the design dims and integer values in [0, |B|].

    Raises:
        PrecisionFailureError: FFT output could not be rounded unambiguously.
    """
    _validate_pair(design, mmn)
    measure = mmn.volume
    if design.is_empty:
        return OverlapField(np.zeros(design.dims, dtype=np.int64), measure, 0.0, "fft")

    # correlation = convolution with the point-reflected MMN
    kernel = np.flip(mmn.occupancy)
    center = mmn_center(mmn)
    crop = tuple(s - 1 - c for s, c in zip(mmn.dims, center))
    values, deviation = exact_convolution(design.occupancy, kernel, crop, design.dims,
                                          max_deviation, upper=measure)
    logger.debug(f"overlap field {design.dims} x |B|={measure}: max deviation {deviation:.2e}")
    return OverlapField(values, measure, deviation, "fft")


def shifted(arr: np.ndarray, offset: Sequence[int]) -> np.ndarray:
    """out[t] = arr[t + offset] where in range, else 0."""
    out = np.zeros_like(arr)
    src, dst = [], []
    for o, n in zip(offset, arr.shape):
        if abs(o) >= n:
            return out
        if o >= 0:
            src.append(slice(o, n))
            dst.append(slice(0, n - o))
        else:
            src.append(slice(0, n + o))
            dst.append(slice(-o, n))
    out[tuple(dst)] = arr[tuple(src)]
    return out


def overlap_field_direct(design: VoxelGrid, mmn: VoxelGrid,
                         work_limit: Optional[int] = None) -> OverlapField:
    """Exact OM by explicit displacement and count; the reference oracle.

    Raises:
        WorkBoundExceededError: lattice size times |B| exceeds the work bound.
    """
    _validate_pair(design, mmn)
    limit = Settings.DIRECT_WORK_LIMIT if work_limit is None else work_limit
    work = int(np.prod(design.dims)) * mmn.volume
    if work > limit:
        raise WorkBoundExceededError(f"direct overlap needs {work} operations, bound is {limit}")

    occ = design.occupancy.astype(np.int64)
    values = np.zeros(design.dims, dtype=np.int64)
    for offset in mmn_offsets(mmn):
        values += shifted(occ, offset)
    return OverlapField(values, mmn.volume, 0.0, "direct")


def omr(field: OverlapField) -> OmrField:
    """Overlap measure ratio OM / |B|, exact."""
    return OmrField(field.values, field.mmn_measure)


def overlap_field(design: VoxelGrid, mmn: VoxelGrid, method: str = "fft") -> OverlapField:
    if method == "fft":
        return overlap_field_fft(design, mmn)
    if method == "direct":
        return overlap_field_direct(design, mmn)
    raise ValueError(f"unknown overlap method {method!r}")
