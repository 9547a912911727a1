"""
Connected components and Betti numbers of voxel sets.

Closed voxels sharing any vertex touch, so foreground components use vertex
adjacency (26 in 3D, 8 in 2D). The complement of a closed voxel set is
open and only connects through shared faces (6 / 4).
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Literal, Tuple

import numpy as np
from scipy import ndimage

try:
    from ..core.errors import InternalConsistencyError  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
    from .complex import complex_of, euler  # type: ignore
except Exception:
    from src.core.errors import InternalConsistencyError  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.cubical.complex import complex_of, euler  # type: ignore

logger = logging.getLogger(__name__)

Connectivity = Literal["vertex", "face"]

_ALIASES = {"vertex": "vertex", "vertex-26": "vertex", "vertex-8": "vertex",
            "face": "face", "face-6": "face", "face-4": "face"}


def structure_for(ndim: int, connectivity: str) -> np.ndarray:
    kind = _ALIASES.get(connectivity)
    if kind is None:
        raise ValueError(f"unknown connectivity {connectivity!r}")
    rank = ndim if kind == "vertex" else 1
    return ndimage.generate_binary_structure(ndim, rank)


def label_mask(mask: np.ndarray, connectivity: str = "vertex") -> Tuple[np.ndarray, int]:
    """Label components of a boolean array, numbered by first voxel in canonical order."""
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=structure_for(mask.ndim, connectivity))
    if count > 1:
        # scipy scans in C order; canonical order has x fastest (Fortran order)
        linear = np.arange(mask.size, dtype=np.int64).reshape(mask.shape, order="F")
        firsts = np.asarray(ndimage.minimum(linear, labels, index=np.arange(1, count + 1)))
        order = np.argsort(firsts, kind="stable")
        remap = np.zeros(count + 1, dtype=labels.dtype)
        remap[order + 1] = np.arange(1, count + 1, dtype=labels.dtype)
        labels = remap[labels]
    return labels, int(count)


def label_components(grid: VoxelGrid, connectivity: str = "vertex") -> Tuple[np.ndarray, int]:
    """Label occupied voxels; labels ascend with each component's minimal voxel index.

    Args:
        grid: Voxel grid (2D or 3D).
        connectivity: 'vertex' (26/8) or 'face' (6/4).

    Returns:
        (labels array with 0 = background, component count)
    """
    return label_mask(grid.occupancy, connectivity)


def bounded_background_components(mask: np.ndarray) -> int:
    """Face-connected components of the complement that do not reach the frame."""
    padded = np.pad(~np.asarray(mask, dtype=bool), 1, constant_values=True)
    _, count = ndimage.label(padded, structure=structure_for(padded.ndim, "face"))
    # the padding ring is one component that holds everything reaching the frame
    return max(0, count - 1)


@dataclass(frozen=True)
class TopologySummary:
    chi: int
    b0: int
    b1: int
    b2: int

    @property
    def betti(self) -> Tuple[int, int, int]:
        return (self.b0, self.b1, self.b2)

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def betti(grid: VoxelGrid) -> TopologySummary:
    """Betti numbers of the closed voxel union.

    b0 counts vertex-connected components, b2 counts enclosed background
    components, and b1 follows from chi = b0 - b1 + b2. In 2D, b2 = 0.
    """
    chi = euler(complex_of(grid))
    _, b0 = label_components(grid, "vertex")
    b2 = bounded_background_components(grid.occupancy) if grid.ndim == 3 else 0
    b1 = b0 + b2 - chi
    if b1 < 0:
        raise InternalConsistencyError(f"negative b1 from chi={chi}, b0={b0}, b2={b2}")
    return TopologySummary(chi=chi, b0=b0, b1=b1, b2=b2)
