"""
Topology ledger: attributes the global Euler characteristic change to features.

chi[M] - chi[D] = sum(ecc over OD features) - sum(ecc over UD features)
holds exactly; a mismatch means a bug and raises InternalConsistencyError.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

try:
    from ..core.errors import InternalConsistencyError  # type: ignore
    from ..core.timing import StageTimer  # type: ignore
    from ..cubical.complex import complex_of, euler  # type: ignore
    from ..cubical.homology import TopologySummary, betti  # type: ignore
    from ..voxel.grid import VoxelGrid, require_same_frame  # type: ignore
    from .features import DeviationFeature, FeatureKind, decompose, extract_features  # type: ignore
except Exception:
    from src.core.errors import InternalConsistencyError  # type: ignore
    from src.core.timing import StageTimer  # type: ignore
    from src.cubical.complex import complex_of, euler  # type: ignore
    from src.cubical.homology import TopologySummary, betti  # type: ignore
    from src.voxel.grid import VoxelGrid, require_same_frame  # type: ignore
    from src.cta.features import DeviationFeature, FeatureKind, decompose, extract_features  # type: ignore

logger = logging.getLogger(__name__)

FEATURE_COLUMNS = [
    "kind", "id", "voxel_count", "chi_solid", "chi_cut", "ecc", "simple", "contribution",
    "centroid", "bbox_lo", "bbox_hi",
]


@dataclass
class CtaReport:
    """Result of one comparative topological analysis."""

    dims: Tuple[int, ...]
    spacing: float
    origin: Tuple[float, ...]
    chi_design: int
    chi_manufactured: int
    ud_features: List[DeviationFeature]
    od_features: List[DeviationFeature]
    design_volume: int
    ud_volume: int
    od_volume: int
    identity_ok: bool = True
    timings: Dict[str, float] = field(default_factory=dict)
    global_topology: Optional[Dict] = None

    @property
    def features(self) -> List[DeviationFeature]:
        return self.ud_features + self.od_features

    @property
    def delta_chi(self) -> int:
        return self.chi_manufactured - self.chi_design

    @property
    def signed_ecc_sum(self) -> int:
        return sum(f.contribution for f in self.features)

    @property
    def nonsimple_ud(self) -> List[DeviationFeature]:
        return [f for f in self.ud_features if not f.simple]

    @property
    def nonsimple_od(self) -> List[DeviationFeature]:
        return [f for f in self.od_features if not f.simple]

    @property
    def is_clean(self) -> bool:
        return not self.nonsimple_ud and not self.nonsimple_od

    def _fraction(self, volume: int) -> float:
        return volume / self.design_volume if self.design_volume else 0.0

    @property
    def ud_volume_fraction(self) -> float:
        return self._fraction(self.ud_volume)

    @property
    def od_volume_fraction(self) -> float:
        return self._fraction(self.od_volume)

    def nonsimple_signature(self) -> frozenset:
        """Identity of the current set of non-simple features."""
        return frozenset(f.signature() for f in self.nonsimple_ud + self.nonsimple_od)

    def aggregates(self) -> Dict:
        return {
            "ud_volume_fraction": round(self.ud_volume_fraction, 6),
            "od_volume_fraction": round(self.od_volume_fraction, 6),
            "ud_components": len(self.ud_features),
            "od_components": len(self.od_features),
            "ud_nonsimple": len(self.nonsimple_ud),
            "od_nonsimple": len(self.nonsimple_od),
        }

    def to_dict(self, include_features: bool = True) -> Dict:
        data = {
            "dims": list(self.dims),
            "spacing": self.spacing,
            "origin": list(self.origin),
            "chi_design": self.chi_design,
            "chi_manufactured": self.chi_manufactured,
            "delta_chi": self.delta_chi,
            "signed_ecc_sum": self.signed_ecc_sum,
            "identity_ok": self.identity_ok,
            "aggregates": self.aggregates(),
            "timings": {k: round(v, 6) for k, v in self.timings.items()},
        }
        if self.global_topology is not None:
            data["global"] = self.global_topology
        if include_features:
            data["features"] = [f.to_dict() for f in self.features]
        return data

    def features_frame(self) -> pd.DataFrame:
        rows = []
        for f in self.features:
            rows.append({
                "kind": f.kind.value,
                "id": f.id,
                "voxel_count": f.voxel_count,
                "chi_solid": f.chi_solid,
                "chi_cut": f.chi_cut,
                "ecc": f.ecc,
                "simple": f.simple,
                "contribution": f.contribution,
                "centroid": tuple(round(c, 3) for c in f.centroid),
                "bbox_lo": f.bbox[0],
                "bbox_hi": f.bbox[1],
            })
        return pd.DataFrame(rows, columns=FEATURE_COLUMNS)

    def ecc_field(self) -> np.ndarray:
        """Each feature's ecc painted over its voxels (0 elsewhere)."""
        out = np.zeros(self.dims, dtype=np.int32)
        for f in self.features:
            out[f.crop][f.mask] = f.ecc
        return out

    def label_field(self) -> np.ndarray:
        """UD features painted +id, OD features -id."""
        out = np.zeros(self.dims, dtype=np.int32)
        for f in self.features:
            out[f.crop][f.mask] = f.id if f.kind == FeatureKind.UD else -f.id
        return out


def _diagnostics(report: CtaReport) -> Dict:
    return {
        "chi_design": report.chi_design,
        "chi_manufactured": report.chi_manufactured,
        "signed_ecc_sum": report.signed_ecc_sum,
        "features": [f.to_dict() for f in report.features if not f.simple],
    }


def ledger(design: VoxelGrid, manufactured: VoxelGrid, workers: Optional[int] = None,
           strict: bool = True, with_global: bool = False) -> CtaReport:
    """Compare a design with its manufactured shape feature by feature.

    Args:
        design: Design grid.
        manufactured: As-manufactured grid on the same frame.
        workers: Threads for per-feature work (defaults to Settings.WORKERS).
        strict: Raise when the ledger identity fails (otherwise only flag it).
        with_global: Also compute Betti summaries of both shapes.

    Returns:
        CtaReport with UD/OD features, aggregates and timings.

    Raises:
        FrameMismatchError: the grids do not share a frame.
        InternalConsistencyError: ledger identity or a per-feature invariant failed.
    """
    require_same_frame(design, manufactured, "design and manufactured shape")
    timer = StageTimer()

    with timer.stage("decompose"):
        common, under, over = decompose(design, manufactured)
    with timer.stage("global_chi"):
        chi_d = euler(complex_of(design))
        chi_m = euler(complex_of(manufactured))
    with timer.stage("ud_features"):
        ud = extract_features(under, FeatureKind.UD, common, workers)
    with timer.stage("od_features"):
        od = extract_features(over, FeatureKind.OD, common, workers)

    report = CtaReport(
        dims=design.dims,
        spacing=design.spacing,
        origin=design.origin,
        chi_design=chi_d,
        chi_manufactured=chi_m,
        ud_features=ud,
        od_features=od,
        design_volume=design.volume,
        ud_volume=under.volume,
        od_volume=over.volume,
    )

    if with_global:
        with timer.stage("betti"):
            report.global_topology = global_comparison(design, manufactured).to_dict()

    report.identity_ok = report.delta_chi == report.signed_ecc_sum
    report.timings = timer.timings
    if not report.identity_ok:
        diag = _diagnostics(report)
        logger.error(f"Ledger identity failed: {json.dumps(diag)}")
        if strict:
            raise InternalConsistencyError(
                f"chi[M] - chi[D] = {report.delta_chi} but features sum to {report.signed_ecc_sum}",
                diag,
            )

    logger.info(
        f"Ledger: chi {chi_d} -> {chi_m}, UD {len(ud)} ({len(report.nonsimple_ud)} non-simple), "
        f"OD {len(od)} ({len(report.nonsimple_od)} non-simple)"
    )
    return report


@dataclass(frozen=True)
class GlobalComparison:
    design: TopologySummary
    manufactured: TopologySummary

    @property
    def changed(self) -> bool:
        return self.design.betti != self.manufactured.betti

    def to_dict(self) -> Dict:
        return {
            "design": self.design.to_dict(),
            "manufactured": self.manufactured.to_dict(),
            "changed": self.changed,
        }


def global_comparison(design: VoxelGrid, manufactured: VoxelGrid) -> GlobalComparison:
    """Betti numbers of both shapes; blind to where the changes happen."""
    require_same_frame(design, manufactured, "design and manufactured shape")
    return GlobalComparison(betti(design), betti(manufactured))
