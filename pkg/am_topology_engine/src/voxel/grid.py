"""
Voxel grids and the regularized set algebra on them.

Each occupied voxel stands for a closed axis-aligned cube. Arrays are indexed
[x, y, z] (or [x, y] for slices); the canonical linear order has x varying
fastest, then y, then z.
"""
import math
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

try:
    from ..core.errors import FrameMismatchError  # type: ignore
except Exception:
    from src.core.errors import FrameMismatchError  # type: ignore

logger = logging.getLogger(__name__)

AXES = ("x", "y", "z")


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Immutable occupancy grid with its physical frame.

    Args:
        occupancy: Boolean array of shape dims (2D or 3D).
        spacing: Uniform physical voxel size (> 0).
        origin: Physical position of voxel (0, ..., 0), one entry per axis.
    """

    occupancy: np.ndarray
    spacing: float = 1.0
    origin: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ is self.occupancy and occ.flags.writeable:
            occ = occ.copy()
        if occ.ndim not in (2, 3):
            raise ValueError(f"occupancy must be 2D or 3D, got {occ.ndim}D")
        if min(occ.shape) < 1:
            raise ValueError(f"dims must all be >= 1, got {occ.shape}")
        spacing = float(self.spacing)
        if not spacing > 0 or not math.isfinite(spacing):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        origin = self.origin if self.origin is not None else (0.0,) * occ.ndim
        origin = tuple(float(o) for o in origin)
        if len(origin) != occ.ndim:
            raise ValueError(f"origin has {len(origin)} entries for a {occ.ndim}D grid")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(int(n) for n in self.occupancy.shape)

    @property
    def ndim(self) -> int:
        return self.occupancy.ndim

    @property
    def volume(self) -> int:
        """Number of occupied voxels."""
        return int(np.count_nonzero(self.occupancy))

    @property
    def is_empty(self) -> bool:
        return not self.occupancy.any()

    def same_frame(self, other: "VoxelGrid") -> bool:
        return (
            self.dims == other.dims
            and math.isclose(self.spacing, other.spacing, rel_tol=1e-9)
            and all(math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)
                    for a, b in zip(self.origin, other.origin))
        )

    def with_occupancy(self, occupancy: np.ndarray) -> "VoxelGrid":
        """New grid on the same frame."""
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.shape != self.occupancy.shape:
            raise FrameMismatchError(f"occupancy shape {occupancy.shape} != dims {self.dims}")
        return VoxelGrid(occupancy, self.spacing, self.origin)

    def empty_like(self) -> "VoxelGrid":
        return self.with_occupancy(np.zeros(self.dims, dtype=bool))

    def linear_occupancy(self) -> np.ndarray:
        """Occupancy flattened in canonical order (x fastest)."""
        return self.occupancy.ravel(order="F")

    def voxel_indices(self) -> np.ndarray:
        """Integer coordinates of occupied voxels, shape (volume, ndim)."""
        return np.argwhere(self.occupancy)

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return self.same_frame(other) and bool(np.array_equal(self.occupancy, other.occupancy))

    def __repr__(self):
        return f"VoxelGrid(dims={self.dims}, volume={self.volume}, spacing={self.spacing})"

    @classmethod
    def empty(cls, dims: Sequence[int], spacing: float = 1.0,
              origin: Optional[Tuple[float, ...]] = None) -> "VoxelGrid":
        return cls(np.zeros(tuple(dims), dtype=bool), spacing, origin)

    @classmethod
    def from_voxels(cls, dims: Sequence[int], voxels: Iterable[Sequence[int]],
                    spacing: float = 1.0, origin: Optional[Tuple[float, ...]] = None) -> "VoxelGrid":
        """Build a grid from a list of occupied voxel coordinates."""
        occ = np.zeros(tuple(dims), dtype=bool)
        pts = np.asarray(list(voxels), dtype=np.int64)
        if pts.size:
            occ[tuple(pts.T)] = True
        return cls(occ, spacing, origin)


@dataclass(frozen=True, eq=False)
class Slice(VoxelGrid):
    """2D layer cut from a 3D grid along `axis` at index `layer`."""

    axis: str = "z"
    layer: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.ndim != 2:
            raise ValueError(f"Slice must be 2D, got {self.ndim}D")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")

    def with_occupancy(self, occupancy: np.ndarray) -> "Slice":
        occupancy = np.asarray(occupancy, dtype=bool)
        if occupancy.shape != self.occupancy.shape:
            raise FrameMismatchError(f"occupancy shape {occupancy.shape} != dims {self.dims}")
        return Slice(occupancy, self.spacing, self.origin, self.axis, self.layer)

    def __repr__(self):
        return f"Slice(axis={self.axis}, layer={self.layer}, dims={self.dims}, volume={self.volume})"


def require_same_frame(a: VoxelGrid, b: VoxelGrid, what: str = "operands"):
    """Raise FrameMismatchError unless a and b share dims, spacing and origin."""
    if not a.same_frame(b):
        raise FrameMismatchError(
            f"{what} do not share a frame: dims {a.dims} vs {b.dims}, "
            f"spacing {a.spacing} vs {b.spacing}, origin {a.origin} vs {b.origin}"
        )


def intersect_reg(a: VoxelGrid, b: VoxelGrid) -> VoxelGrid:
    """Regularized intersection a ∩* b (voxelwise AND)."""
    require_same_frame(a, b)
    return a.with_occupancy(a.occupancy & b.occupancy)


def subtract_reg(a: VoxelGrid, b: VoxelGrid) -> VoxelGrid:
    """Regularized difference a −* b (voxelwise AND-NOT)."""
    require_same_frame(a, b)
    return a.with_occupancy(a.occupancy & ~b.occupancy)


def union_set(a: VoxelGrid, b: VoxelGrid) -> VoxelGrid:
    """Union a ∪ b (voxelwise OR)."""
    require_same_frame(a, b)
    return a.with_occupancy(a.occupancy | b.occupancy)


def complement(a: VoxelGrid) -> VoxelGrid:
    """Complement within the frame."""
    return a.with_occupancy(~a.occupancy)


def reflect(a: VoxelGrid) -> VoxelGrid:
    """Point reflection about the grid center (index i -> n - 1 - i on every axis)."""
    return a.with_occupancy(np.flip(a.occupancy))


def _axis_index(axis: str) -> int:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return AXES.index(axis)


def extract_slices(grid: VoxelGrid, axis: str = "z") -> List[Slice]:
    """Cut a 3D grid into its 2D layers along `axis`, in increasing layer order."""
    if grid.ndim != 3:
        raise ValueError("extract_slices needs a 3D grid")
    k = _axis_index(axis)
    origin2 = tuple(o for i, o in enumerate(grid.origin) if i != k)
    return [
        Slice(np.take(grid.occupancy, layer, axis=k), grid.spacing, origin2, axis, layer)
        for layer in range(grid.dims[k])
    ]


def stack_slices(slices: Sequence[Slice], axis: Optional[str] = None,
                 layer_origin: float = 0.0) -> VoxelGrid:
    """Inverse of extract_slices: stack 2D layers back into a 3D grid.

    Slices are placed by their layer index, so the input may arrive in any order
    but must cover 0..n-1 exactly once.
    """
    if not slices:
        raise ValueError("stack_slices needs at least one slice")
    axis = axis or slices[0].axis
    k = _axis_index(axis)
    ordered = sorted(slices, key=lambda s: s.layer)
    if [s.layer for s in ordered] != list(range(len(ordered))):
        raise ValueError("slice layers must cover 0..n-1 exactly once")
    first = ordered[0]
    for s in ordered[1:]:
        if s.dims != first.dims or not math.isclose(s.spacing, first.spacing, rel_tol=1e-9):
            raise FrameMismatchError("slices do not share a frame")
    occ = np.stack([s.occupancy for s in ordered], axis=k)
    origin = list(first.origin)
    origin.insert(k, layer_origin)
    return VoxelGrid(occ, first.spacing, tuple(origin))
