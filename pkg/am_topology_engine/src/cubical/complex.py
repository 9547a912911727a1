"""
Cubical complexes of voxel sets on the doubled lattice.

A cell is identified by its doubled coordinates: along each axis an even
index 2i is the lattice plane i (the cell is degenerate there) and an odd
index 2i+1 spans [i, i+1]. Equivalently (min corner, extent mask) with
corner = index // 2 and mask bit = index % 2. A cell's dimension is its
number of odd coordinates; voxel (x, y, z) is the 3-cell (2x+1, 2y+1, 2z+1).
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

try:
    from ..core.errors import FrameMismatchError  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
except Exception:
    from src.core.errors import FrameMismatchError  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore

logger = logging.getLogger(__name__)


def _parity_slices(ndim: int):
    """(dimension, slicer) for every parity class of the doubled lattice."""
    for parity in itertools.product((0, 1), repeat=ndim):
        yield sum(parity), tuple(slice(p, None, 2) for p in parity)


@dataclass(frozen=True, eq=False)
class CubicalComplex:
    """Closed cubical complex as a boolean mask over the doubled lattice.

    Attributes:
        cells: bool array of shape 2*dims + 1.
        offset: voxel coordinates of the lattice origin (nonzero for crops).
        counts: (n_0, ..., n_d), cells per dimension.
    """

    cells: np.ndarray
    offset: Tuple[int, ...] = ()
    counts: Tuple[int, ...] = ()

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        if not self.offset:
            object.__setattr__(self, "offset", (0,) * cells.ndim)
        counts = [0] * (cells.ndim + 1)
        for dim, sl in _parity_slices(cells.ndim):
            counts[dim] += int(np.count_nonzero(cells[sl]))
        object.__setattr__(self, "counts", tuple(counts))

    @property
    def ndim(self) -> int:
        return self.cells.ndim

    @property
    def voxel_dims(self) -> Tuple[int, ...]:
        return tuple((n - 1) // 2 for n in self.cells.shape)

    @property
    def is_empty(self) -> bool:
        return not any(self.counts)

    def cell_ids(self, dim: int) -> np.ndarray:
        """Sorted doubled coordinates of the dim-cells, shape (n_dim, ndim), lexicographic."""
        ids = np.argwhere(self.cells)
        odd = (ids % 2).sum(axis=1)
        return ids[odd == dim]

    def __repr__(self):
        return f"CubicalComplex(counts={self.counts}, chi={euler(self)})"


def closure_cells(occupancy: np.ndarray) -> np.ndarray:
    """Cell mask of the closure of the occupied voxels."""
    occupancy = np.asarray(occupancy, dtype=bool)
    shape = tuple(2 * n + 1 for n in occupancy.shape)
    cells = np.zeros(shape, dtype=bool)
    cells[tuple(slice(1, None, 2) for _ in shape)] = occupancy
    # the closure of a top cell is its Chebyshev-1 neighborhood on the doubled lattice
    for axis in range(cells.ndim):
        lo = [slice(None)] * cells.ndim
        hi = [slice(None)] * cells.ndim
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        grown = cells.copy()
        grown[tuple(lo)] |= cells[tuple(hi)]
        grown[tuple(hi)] |= cells[tuple(lo)]
        cells = grown
    return cells


def complex_of(grid: VoxelGrid, offset: Optional[Tuple[int, ...]] = None) -> CubicalComplex:
    """Cells of the closure of the union of the grid's occupied voxels."""
    return CubicalComplex(closure_cells(grid.occupancy), offset or ())


def complex_of_mask(mask: np.ndarray, offset: Optional[Tuple[int, ...]] = None) -> CubicalComplex:
    return CubicalComplex(closure_cells(mask), offset or ())


def euler(cx: CubicalComplex) -> int:
    """chi = n_0 - n_1 + n_2 - n_3 (alternating sum over dimensions)."""
    return sum((-1) ** d * n for d, n in enumerate(cx.counts))


def intersect_complexes(a: CubicalComplex, b: CubicalComplex) -> CubicalComplex:
    """Cellwise set intersection; both complexes must live on the same lattice."""
    if a.cells.shape != b.cells.shape or a.offset != b.offset:
        raise FrameMismatchError(
            f"complexes live on different lattices: {a.cells.shape}@{a.offset} vs "
            f"{b.cells.shape}@{b.offset}"
        )
    return CubicalComplex(a.cells & b.cells, a.offset)
