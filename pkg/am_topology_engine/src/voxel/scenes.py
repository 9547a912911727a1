"""
Synthetic parts with known topology.

Pairs return (design, manufactured) on a shared frame; single builders return
a design grid. Used by the test-suite and by scripts/make_scenes.py.
"""
from typing import Sequence, Tuple

import numpy as np

try:
    from .grid import VoxelGrid  # type: ignore
except Exception:
    from src.voxel.grid import VoxelGrid  # type: ignore


def _fill(occ: np.ndarray, lo: Sequence[int], hi: Sequence[int], value: bool = True):
    """Set the inclusive box lo..hi."""
    occ[tuple(slice(a, b + 1) for a, b in zip(lo, hi))] = value


def solid_box(frame: Sequence[int], lo: Sequence[int], hi: Sequence[int]) -> VoxelGrid:
    occ = np.zeros(tuple(frame), dtype=bool)
    _fill(occ, lo, hi)
    return VoxelGrid(occ)


def bridge_pair() -> Tuple[VoxelGrid, VoxelGrid]:
    """Two blocks joined by a 3-voxel bar; the manufactured shape loses the bar."""
    occ = np.zeros((9, 5, 5), dtype=bool)
    _fill(occ, (1, 1, 1), (2, 3, 3))
    _fill(occ, (6, 1, 1), (7, 3, 3))
    manufactured = occ.copy()
    _fill(occ, (3, 2, 2), (5, 2, 2))
    return VoxelGrid(occ), VoxelGrid(manufactured)


def tunnel_plug_pair() -> Tuple[VoxelGrid, VoxelGrid]:
    """Block with a 1-voxel through-tunnel; the manufactured shape plugs it."""
    manufactured = np.zeros((7, 7, 5), dtype=bool)
    _fill(manufactured, (1, 1, 1), (5, 5, 3))
    design = manufactured.copy()
    _fill(design, (3, 3, 1), (3, 3, 3), False)
    return VoxelGrid(design), VoxelGrid(manufactured)


def cavity_fill_pair() -> Tuple[VoxelGrid, VoxelGrid]:
    """Hollow 3x3x3 shell; the manufactured shape fills the cavity."""
    manufactured = np.zeros((5, 5, 5), dtype=bool)
    _fill(manufactured, (1, 1, 1), (3, 3, 3))
    design = manufactured.copy()
    design[2, 2, 2] = False
    return VoxelGrid(design), VoxelGrid(manufactured)


def rounded_corner_pair() -> Tuple[VoxelGrid, VoxelGrid]:
    """Block whose manufactured copy misses one corner voxel."""
    design = np.zeros((5, 5, 5), dtype=bool)
    _fill(design, (1, 1, 1), (3, 3, 3))
    manufactured = design.copy()
    manufactured[1, 1, 1] = False
    return VoxelGrid(design), VoxelGrid(manufactured)


def canceling_pair() -> Tuple[VoxelGrid, VoxelGrid]:
    """Slab with two holes: one gets plugged, the other split in two.

    The two non-simple OD features cancel, so the global Euler characteristic
    and Betti numbers are unchanged.
    """
    design = np.ones((11, 5, 2), dtype=bool)
    design[2, 2, :] = False
    design[6:9, 2, :] = False
    manufactured = design.copy()
    manufactured[2, 2, :] = True
    manufactured[7, 2, :] = True
    return VoxelGrid(design), VoxelGrid(manufactured)


def three_beam_slice() -> VoxelGrid:
    """2D part: two blocks joined by a thick middle beam and two 1-pixel beams."""
    occ = np.zeros((13, 11), dtype=bool)
    _fill(occ, (1, 1), (3, 9))
    _fill(occ, (9, 1), (11, 9))
    _fill(occ, (4, 4), (8, 6))
    _fill(occ, (4, 1), (8, 1))
    _fill(occ, (4, 9), (8, 9))
    return VoxelGrid(occ)


def notched_bar() -> VoxelGrid:
    """3x3 bar with a single-voxel notch; a 3x3x3 cube neighborhood breaks it at high lambda."""
    occ = np.zeros((11, 5, 5), dtype=bool)
    _fill(occ, (1, 1, 1), (9, 3, 3))
    _fill(occ, (5, 1, 1), (5, 3, 3), False)
    occ[5, 2, 2] = True
    return VoxelGrid(occ)


def slotted_frame() -> VoxelGrid:
    """Block, two arms and a thin beam around a 1-voxel-wide slot.

    With a 3x3x3 cube neighborhood, every translation that restores the beam
    also covers the slot, so no threshold keeps both the loop and the tunnel.
    """
    occ = np.zeros((11, 11, 5), dtype=bool)
    _fill(occ, (1, 1, 1), (5, 9, 3))
    _fill(occ, (6, 1, 1), (7, 3, 3))
    _fill(occ, (6, 7, 1), (7, 9, 3))
    _fill(occ, (7, 4, 1), (7, 6, 3))
    return VoxelGrid(occ)


def grid_lattice(rows: int = 4, cols: int = 5, hole: int = 2, bar: int = 1,
                 border: int = 3, thickness: int = 3, pad: int = 1) -> VoxelGrid:
    """Slab pierced by rows x cols square through-holes.

    Euler characteristic is 1 - rows * cols by construction.
    """
    nx = 2 * (pad + border) + cols * hole + (cols - 1) * bar
    ny = 2 * (pad + border) + rows * hole + (rows - 1) * bar
    nz = thickness + 2 * pad
    occ = np.zeros((nx, ny, nz), dtype=bool)
    _fill(occ, (pad, pad, pad), (nx - pad - 1, ny - pad - 1, pad + thickness - 1))
    for r in range(rows):
        for c in range(cols):
            x0 = pad + border + c * (hole + bar)
            y0 = pad + border + r * (hole + bar)
            _fill(occ, (x0, y0, 0), (x0 + hole - 1, y0 + hole - 1, nz - 1), False)
    return VoxelGrid(occ)


def hollow_shell(size: int = 3, pad: int = 1) -> VoxelGrid:
    """Cube of side `size` with its interior removed (one cavity)."""
    n = size + 2 * pad
    occ = np.zeros((n, n, n), dtype=bool)
    _fill(occ, (pad,) * 3, (pad + size - 1,) * 3)
    _fill(occ, (pad + 1,) * 3, (pad + size - 2,) * 3, False)
    return VoxelGrid(occ)


def square_ring(side: int = 3, pad: int = 1, height: int = 1) -> VoxelGrid:
    """Square annulus of one-voxel wall, extruded `height` layers."""
    n = side + 2 * pad
    occ = np.zeros((n, n, height), dtype=bool)
    _fill(occ, (pad, pad, 0), (pad + side - 1, pad + side - 1, height - 1))
    _fill(occ, (pad + 1, pad + 1, 0), (pad + side - 2, pad + side - 2, height - 1), False)
    return VoxelGrid(occ)
