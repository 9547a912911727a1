"""
Deviation features and their Euler characteristic contributions.

The design D and manufactured shape M split into common C = D ∩* M,
under-deposition U = D −* M and over-deposition O = M −* D. Each
vertex-connected component F of U or O is a feature; its ecc is
chi[F] - chi[cut boundary], the cut boundary being the cells F shares
with C.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import ndimage

try:
    from ..core.config import resolve_workers  # type: ignore
    from ..core.errors import InternalConsistencyError  # type: ignore
    from ..cubical.complex import (  # type: ignore
        CubicalComplex, closure_cells, complex_of, euler, intersect_complexes,
    )
    from ..cubical.homology import label_components  # type: ignore
    from ..voxel.grid import VoxelGrid, intersect_reg, require_same_frame, subtract_reg  # type: ignore
except Exception:
    from src.core.config import resolve_workers  # type: ignore
    from src.core.errors import InternalConsistencyError  # type: ignore
    from src.cubical.complex import (  # type: ignore
        CubicalComplex, closure_cells, complex_of, euler, intersect_complexes,
    )
    from src.cubical.homology import label_components  # type: ignore
    from src.voxel.grid import VoxelGrid, intersect_reg, require_same_frame, subtract_reg  # type: ignore

logger = logging.getLogger(__name__)


class FeatureKind(str, Enum):
    UD = "UD"
    OD = "OD"


class Decomposition(NamedTuple):
    common: VoxelGrid
    under: VoxelGrid
    over: VoxelGrid


def decompose(design: VoxelGrid, manufactured: VoxelGrid) -> Decomposition:
    """Split into (C, U, O); the three are pairwise disjoint and C ∪ U = D, C ∪ O = M."""
    require_same_frame(design, manufactured, "design and manufactured shape")
    return Decomposition(
        intersect_reg(design, manufactured),
        subtract_reg(design, manufactured),
        subtract_reg(manufactured, design),
    )


def cut_boundary(feature: VoxelGrid, common: VoxelGrid) -> CubicalComplex:
    """complex_of(F) ∩ complex_of(C) for a feature voxel-disjoint from C.

    The result has no 3-cells (2-cells in 2D).
    """
    require_same_frame(feature, common, "feature and common part")
    if np.any(feature.occupancy & common.occupancy):
        raise InternalConsistencyError("feature shares voxels with the common part")
    cut = intersect_complexes(complex_of(feature), complex_of(common))
    if cut.counts[-1]:
        raise InternalConsistencyError(f"cut boundary holds {cut.counts[-1]} top cells")
    return cut


@dataclass(frozen=True, eq=False)
class DeviationFeature:
    """One connected component of U or O, stored as a padded crop.

    Attributes:
        kind: UD or OD.
        id: component label within its kind.
        mask: crop of the feature's voxels.
        lo: frame coordinates of the crop's first voxel.
        cut: cut boundary on the crop's doubled lattice (offset lo).
        voxel_count, chi_solid, chi_cut, ecc: counts and Euler characteristics.
        centroid: mean voxel index in frame coordinates.
        bbox: (min, max-exclusive) voxel coordinates of the feature itself.
    """

    kind: FeatureKind
    id: int
    mask: np.ndarray
    lo: Tuple[int, ...]
    cut: CubicalComplex
    voxel_count: int
    chi_solid: int
    chi_cut: int
    centroid: Tuple[float, ...]
    bbox: Tuple[Tuple[int, ...], Tuple[int, ...]]
    bounding_radius: float

    @property
    def ecc(self) -> int:
        return self.chi_solid - self.chi_cut

    @property
    def simple(self) -> bool:
        return self.ecc == 0

    @property
    def contribution(self) -> int:
        """Signed share of chi[M] - chi[D]: +ecc for OD, -ecc for UD."""
        return self.ecc if self.kind == FeatureKind.OD else -self.ecc

    @property
    def crop(self) -> Tuple[slice, ...]:
        return tuple(slice(a, a + n) for a, n in zip(self.lo, self.mask.shape))

    def solid(self, frame: VoxelGrid) -> VoxelGrid:
        """The feature as a full-frame voxel grid."""
        occ = np.zeros(frame.dims, dtype=bool)
        occ[self.crop] = self.mask
        return frame.with_occupancy(occ)

    def signature(self) -> Tuple:
        return (self.kind.value, self.lo, self.mask.shape, self.mask.tobytes())

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "id": self.id,
            "voxel_count": self.voxel_count,
            "chi_solid": self.chi_solid,
            "chi_cut": self.chi_cut,
            "ecc": self.ecc,
            "simple": self.simple,
            "contribution": self.contribution,
            "centroid": [round(c, 4) for c in self.centroid],
            "bbox": [list(self.bbox[0]), list(self.bbox[1])],
            "cut_counts": list(self.cut.counts),
        }


def _padded(box: Tuple[slice, ...], dims: Tuple[int, ...]) -> Tuple[slice, ...]:
    return tuple(slice(max(0, s.start - 1), min(n, s.stop + 1)) for s, n in zip(box, dims))


def _build_feature(kind: FeatureKind, label: int, box: Tuple[slice, ...],
                   labels: np.ndarray, common: np.ndarray) -> DeviationFeature:
    crop = _padded(box, labels.shape)
    mask = labels[crop] == label
    common_crop = common[crop]
    if np.any(mask & common_crop):
        raise InternalConsistencyError(f"{kind.value} feature {label} overlaps the common part")

    solid_cells = closure_cells(mask)
    lo = tuple(s.start for s in crop)
    cut = CubicalComplex(solid_cells & closure_cells(common_crop), lo)
    if cut.counts[-1]:
        raise InternalConsistencyError(
            f"{kind.value} feature {label} has {cut.counts[-1]} top cells in its cut boundary")

    voxels = np.argwhere(mask) + np.asarray(lo)
    centroid = voxels.mean(axis=0)
    reach = float(np.sqrt(((voxels - centroid) ** 2).sum(axis=1)).max())
    return DeviationFeature(
        kind=kind,
        id=label,
        mask=mask,
        lo=lo,
        cut=cut,
        voxel_count=int(voxels.shape[0]),
        chi_solid=euler(CubicalComplex(solid_cells, lo)),
        chi_cut=euler(cut),
        centroid=tuple(float(c) for c in centroid),
        bbox=(tuple(s.start for s in box), tuple(s.stop for s in box)),
        bounding_radius=reach + math.sqrt(mask.ndim) / 2.0,
    )


def extract_features(part: VoxelGrid, kind: FeatureKind, common: VoxelGrid,
                     workers: Optional[int] = None) -> List[DeviationFeature]:
    """Features of U (kind UD) or O (kind OD) against the common part C.

    Returns features sorted by (|ecc| desc, voxel_count desc, id asc).
    """
    require_same_frame(part, common, "deviation part and common part")
    kind = FeatureKind(kind)
    labels, count = label_components(part, "vertex")
    if count == 0:
        return []
    boxes = ndimage.find_objects(labels, max_label=count)
    occ = common.occupancy

    def build(index: int) -> DeviationFeature:
        return _build_feature(kind, index + 1, boxes[index], labels, occ)

    n = resolve_workers(workers)
    if n > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=min(n, count)) as pool:
            features = list(pool.map(build, range(count)))
    else:
        features = [build(i) for i in range(count)]

    features.sort(key=lambda f: (-abs(f.ecc), -f.voxel_count, f.id))
    nonsimple = sum(1 for f in features if not f.simple)
    logger.debug(f"{kind.value}: {count} features, {nonsimple} non-simple")
    return features
