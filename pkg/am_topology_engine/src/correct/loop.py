"""
Correction loop: as-manufactured -> ledger -> adjust OMRT, until clean or stopped.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

try:
    from ..cta.ledger import CtaReport, ledger  # type: ignore
    from ..measure.overlap import OverlapField, overlap_field_fft  # type: ignore
    from ..morphology.motion import as_manufactured_nonuniform  # type: ignore
    from ..morphology.omrt import OmrtField  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
    from .policy import CorrectionConfig, adjust_omrt  # type: ignore
except Exception:
    from src.cta.ledger import CtaReport, ledger  # type: ignore
    from src.measure.overlap import OverlapField, overlap_field_fft  # type: ignore
    from src.morphology.motion import as_manufactured_nonuniform  # type: ignore
    from src.morphology.omrt import OmrtField  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.correct.policy import CorrectionConfig, adjust_omrt  # type: ignore

logger = logging.getLogger(__name__)

TERMINATIONS = ("clean", "iter-cap", "budget", "oscillation")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    omrt: OmrtField
    nonsimple_ud: int
    nonsimple_od: int
    delta_chi: int
    ud_volume_fraction: float
    od_volume_fraction: float
    deviation_volume: int

    def to_dict(self) -> Dict:
        return {
            "iteration": self.iteration,
            "omrt": self.omrt.to_dict(),
            "nonsimple_ud": self.nonsimple_ud,
            "nonsimple_od": self.nonsimple_od,
            "delta_chi": self.delta_chi,
            "ud_volume_fraction": round(self.ud_volume_fraction, 6),
            "od_volume_fraction": round(self.od_volume_fraction, 6),
            "deviation_volume": self.deviation_volume,
        }


@dataclass
class CorrectionTrace:
    iterations: List[IterationRecord]
    terminated_by: str
    final_report: Optional[CtaReport] = field(default=None, repr=False)

    def __post_init__(self):
        if self.terminated_by not in TERMINATIONS:
            raise ValueError(f"unknown termination {self.terminated_by!r}")

    @property
    def clean(self) -> bool:
        return self.terminated_by == "clean"

    @property
    def final_omrt(self) -> OmrtField:
        return self.iterations[-1].omrt

    def to_dict(self) -> Dict:
        return {
            "terminated_by": self.terminated_by,
            "iterations": [r.to_dict() for r in self.iterations],
        }

    def frame(self) -> pd.DataFrame:
        rows = [{k: v for k, v in r.to_dict().items() if k != "omrt"} | {"bumps": len(r.omrt.bumps)}
                for r in self.iterations]
        return pd.DataFrame(rows)


def _record(iteration: int, omrt: OmrtField, report: CtaReport) -> IterationRecord:
    return IterationRecord(
        iteration=iteration,
        omrt=omrt,
        nonsimple_ud=len(report.nonsimple_ud),
        nonsimple_od=len(report.nonsimple_od),
        delta_chi=report.delta_chi,
        ud_volume_fraction=report.ud_volume_fraction,
        od_volume_fraction=report.od_volume_fraction,
        deviation_volume=report.ud_volume + report.od_volume,
    )


def correct_loop(design: VoxelGrid, mmn: VoxelGrid, cfg: Optional[CorrectionConfig] = None,
                 field: Optional[OverlapField] = None,
                 workers: Optional[int] = None) -> Tuple[VoxelGrid, CorrectionTrace]:
    """Adjust a non-uniform threshold until every deviation feature is simple.

    Stops on the first of: deviation budget exceeded, clean ledger, a
    non-simple signature coming back after a different one (oscillation),
    or max_iters adjustments. The budget is checked first, so a clean shape
    that overspends it ends as "budget". The trace has at most max_iters + 1
    records.

    Returns:
        (final as-manufactured grid, trace)
    """
    cfg = cfg or CorrectionConfig()
    field = field or overlap_field_fft(design, mmn)
    omrt = OmrtField.uniform(cfg.initial_lambda)
    scale = max(design.volume, 1)

    records: List[IterationRecord] = []
    seen = set()
    previous = None
    baseline = None
    terminated_by = "iter-cap"
    shape = design
    report = None

    logger.info("=" * 60)
    logger.info(f"Correction: lambda_0 {cfg.initial_lambda}, step {cfg.step}, cap {cfg.max_iters}")
    for iteration in range(cfg.max_iters + 1):
        shape = as_manufactured_nonuniform(design, mmn, omrt, field)
        report = ledger(design, shape, workers)
        record = _record(iteration, omrt, report)
        records.append(record)
        logger.info(
            f"iter {iteration}: non-simple UD {record.nonsimple_ud} OD {record.nonsimple_od}, "
            f"delta chi {record.delta_chi}, bumps {len(omrt.bumps)}"
        )

        if baseline is None:
            baseline = record.deviation_volume
        if (record.deviation_volume - baseline) / scale > cfg.deviation_budget:
            terminated_by = "budget"
            break
        if report.is_clean:
            terminated_by = "clean"
            break
        signature = report.nonsimple_signature()
        if signature in seen and signature != previous:
            terminated_by = "oscillation"
            break
        seen.add(signature)
        previous = signature
        if iteration == cfg.max_iters:
            terminated_by = "iter-cap"
            break
        omrt = adjust_omrt(omrt, report, cfg, mmn)

    if terminated_by == "clean":
        logger.info(f"✓ Correction clean after {len(records) - 1} adjustments")
    else:
        logger.warning(f"Correction stopped by {terminated_by} after {len(records)} iterations")
    return shape, CorrectionTrace(records, terminated_by, report)
