"""
Minimal manufacturable neighborhoods (MMN).

An MMN is a small voxel grid with odd dims per axis; its reference voxel is
the center index (s - 1) // 2, which also applies to user-supplied MMN grids
of even size.
"""
import math
import logging
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

try:
    from ..core.errors import DegenerateMmnError  # type: ignore
    from .grid import VoxelGrid  # type: ignore
except Exception:
    from src.core.errors import DegenerateMmnError  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore

logger = logging.getLogger(__name__)

MmnShape = Literal["sphere", "cube", "diamond", "ellipsoid", "cylinder"]


class MmnSpec(BaseModel):
    """MMN shape and size in voxels.

    `radius` is the sphere/diamond/cylinder radius or the cube half-extent.
    `half_extents` gives per-axis semi-axes for ellipsoids (and optionally
    boxes). `height` is the cylinder half-height along the last axis.
    """

    model_config = ConfigDict(frozen=True)

    shape: MmnShape
    radius: int = 1
    half_extents: Optional[Tuple[int, ...]] = None
    height: int = 1
    ndim: int = Field(default=3, ge=2, le=3)

    def label(self) -> str:
        if self.shape == "ellipsoid" or (self.shape == "cube" and self.half_extents):
            return f"{self.shape}:{','.join(str(h) for h in self.half_extents)}"
        if self.shape == "cylinder":
            return f"cylinder:{self.radius},{self.height}"
        return f"{self.shape}:{self.radius}"


def _half_extents(spec: MmnSpec) -> Tuple[int, ...]:
    n = spec.ndim
    if spec.shape == "ellipsoid":
        if spec.half_extents is None or len(spec.half_extents) != n:
            raise DegenerateMmnError(f"ellipsoid needs {n} half-extents")
        return tuple(spec.half_extents)
    if spec.shape == "cube" and spec.half_extents is not None:
        if len(spec.half_extents) != n:
            raise DegenerateMmnError(f"box needs {n} half-extents")
        return tuple(spec.half_extents)
    if spec.shape == "cylinder":
        if n != 3:
            raise DegenerateMmnError("cylinder MMN is only defined in 3D")
        return (spec.radius, spec.radius, spec.height)
    return (spec.radius,) * n


def make_mmn(spec: MmnSpec) -> VoxelGrid:
    """Rasterize an MMN spec into a centered voxel grid.

    Args:
        spec: Shape and size parameters.

    Returns:
        VoxelGrid with dims 2h+1 per axis, symmetric under point reflection.

    Raises:
        DegenerateMmnError: negative sizes, or a shape not defined in spec.ndim.
    """
    half = _half_extents(spec)
    if any(h < 0 for h in half) or spec.radius < 0 or spec.height < 0:
        raise DegenerateMmnError(f"MMN sizes must be >= 0: {spec}")

    coords = np.meshgrid(*[np.arange(-h, h + 1) for h in half], indexing="ij")

    if spec.shape == "sphere":
        occ = sum(c.astype(np.int64) ** 2 for c in coords) <= spec.radius ** 2
    elif spec.shape == "cube":
        occ = np.ones(coords[0].shape, dtype=bool)
    elif spec.shape == "diamond":
        occ = sum(np.abs(c) for c in coords) <= spec.radius
    elif spec.shape == "ellipsoid":
        # exact rational test: sum (c_i / a_i)^2 <= 1, with a_i = 0 forcing c_i = 0
        flat = np.zeros(coords[0].shape, dtype=bool)
        denom = math.prod(max(a, 1) ** 2 for a in half)
        acc = np.zeros(coords[0].shape, dtype=np.int64)
        for c, a in zip(coords, half):
            if a == 0:
                flat |= c != 0
            else:
                acc += c.astype(np.int64) ** 2 * (denom // (a * a))
        occ = (acc <= denom) & ~flat
    elif spec.shape == "cylinder":
        x, y, z = coords
        occ = (x.astype(np.int64) ** 2 + y.astype(np.int64) ** 2) <= spec.radius ** 2
    else:
        raise DegenerateMmnError(f"unknown MMN shape {spec.shape!r}")

    grid = VoxelGrid(occ)
    if grid.is_empty:
        raise DegenerateMmnError(f"MMN {spec.label()} rasterizes to nothing")
    logger.debug(f"MMN {spec.label()} -> dims {grid.dims}, |B| = {grid.volume}")
    return grid


def parse_mmn_spec(text: str, ndim: int = 3) -> MmnSpec:
    """Parse 'shape:params' strings.

    Examples: 'sphere:5', 'cube:1', 'diamond:1', 'ellipsoid:3,3,1',
    'cylinder:2,4' (radius, half-height), 'cube:2,2,1' (box).
    """
    try:
        shape, _, params = text.strip().partition(":")
        shape = shape.lower()
        values = tuple(int(p) for p in params.split(",")) if params else (1,)
    except ValueError as e:
        raise DegenerateMmnError(f"cannot parse MMN spec {text!r}: {e}")

    if shape not in ("sphere", "cube", "diamond", "ellipsoid", "cylinder"):
        raise DegenerateMmnError(f"unknown MMN shape {shape!r}")
    if shape == "ellipsoid":
        return MmnSpec(shape=shape, half_extents=values, ndim=ndim)
    if shape == "cube" and len(values) > 1:
        return MmnSpec(shape=shape, half_extents=values, ndim=ndim)
    if shape == "cylinder":
        if len(values) != 2:
            raise DegenerateMmnError("cylinder spec is 'cylinder:radius,half_height'")
        return MmnSpec(shape=shape, radius=values[0], height=values[1], ndim=ndim)
    if len(values) != 1:
        raise DegenerateMmnError(f"{shape} spec takes a single size, got {values}")
    return MmnSpec(shape=shape, radius=values[0], ndim=ndim)


def mmn_center(mmn: VoxelGrid) -> Tuple[int, ...]:
    """Reference voxel index of an MMN grid."""
    return tuple((s - 1) // 2 for s in mmn.dims)


def mmn_offsets(mmn: VoxelGrid) -> np.ndarray:
    """Occupied MMN voxels as offsets from the reference voxel, shape (|B|, ndim)."""
    return mmn.voxel_indices() - np.asarray(mmn_center(mmn))


def circumradius(mmn: VoxelGrid) -> float:
    """Distance from the reference voxel center to the farthest MMN voxel corner."""
    offsets = mmn_offsets(mmn)
    if offsets.size == 0:
        return 0.0
    far = float(np.sqrt((offsets.astype(float) ** 2).sum(axis=1)).max())
    return far + math.sqrt(mmn.ndim) / 2.0
