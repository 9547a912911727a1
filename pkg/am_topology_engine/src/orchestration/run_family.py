"""
Family flow: one overlap field, many thresholds, exported members and a chi table.
"""
import logging
from pathlib import Path
from typing import List, Optional

import pandas as pd

try:
    from ..core.timing import StageTimer  # type: ignore
    from ..cubical.complex import complex_of, euler  # type: ignore
    from ..measure.overlap import omr, overlap_field_fft  # type: ignore
    from ..morphology.motion import extreme_max_od, extreme_min_ud, family  # type: ignore
    from ..morphology.thresholds import format_lambda, parse_lambda_list  # type: ignore
    from ..voxel.grid import VoxelGrid  # type: ignore
    from ..voxel.io import load_grid, save_grid  # type: ignore
    from ..voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from ..voxel.vtk import write_vtk_volume  # type: ignore
    from .reports import RunManifest, file_sha256, print_family_table, write_manifest  # type: ignore
except Exception:
    from src.core.timing import StageTimer  # type: ignore
    from src.cubical.complex import complex_of, euler  # type: ignore
    from src.measure.overlap import omr, overlap_field_fft  # type: ignore
    from src.morphology.motion import extreme_max_od, extreme_min_ud, family  # type: ignore
    from src.morphology.thresholds import format_lambda, parse_lambda_list  # type: ignore
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.voxel.io import load_grid, save_grid  # type: ignore
    from src.voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from src.voxel.vtk import write_vtk_volume  # type: ignore
    from src.orchestration.reports import (  # type: ignore
        RunManifest, file_sha256, print_family_table, write_manifest,
    )

logger = logging.getLogger(__name__)


def member_row(label: str, design: VoxelGrid, shape: VoxelGrid, note: str = "") -> dict:
    under = int((design.occupancy & ~shape.occupancy).sum())
    over = int((shape.occupancy & ~design.occupancy).sum())
    scale = design.volume or 1
    return {
        "lambda": label,
        "volume": shape.volume,
        "chi": euler(complex_of(shape)),
        "ud_volume_fraction": under / scale,
        "od_volume_fraction": over / scale,
        "note": note,
    }


def run_family(design_path, mmn_text: str, lambdas_text: str, out_dir,
               fmt: str = "binvox", dump_field: bool = False,
               workers: Optional[int] = None, quiet: bool = False) -> RunManifest:
    """Compute and export the as-manufactured family of a design.

    Writes family_NNN.<fmt> per lambda, family.csv (lambda, volume, chi,
    UD/OD volume fractions, with the two extremes appended) and manifest.json.
    """
    logger.info("=" * 60)
    logger.info("Starting FAMILY")
    logger.info("=" * 60)
    out_dir = Path(out_dir)
    timer = StageTimer()

    with timer.stage("load"):
        design = load_grid(design_path)
        spec = parse_mmn_spec(mmn_text, ndim=design.ndim)
        mmn = make_mmn(spec)
        lams = parse_lambda_list(lambdas_text)
    with timer.stage("overlap_field"):
        field = overlap_field_fft(design, mmn)
    with timer.stage("family"):
        members = family(design, mmn, lams, field=field, workers=workers)

    manifest = RunManifest(
        command="family",
        input_hashes={str(design_path): file_sha256(design_path)},
        mmn=spec.model_dump(),
        lambdas=[format_lambda(lam) for lam in lams],
    )

    rows: List[dict] = [member_row("design", design, design, "design")]
    with timer.stage("export"):
        for i, (lam, shape) in enumerate(members):
            path = save_grid(shape, out_dir / f"family_{i:03d}.{fmt}", fmt)
            manifest.outputs[f"member_{i:03d}"] = str(path)
            rows.append(member_row(format_lambda(lam), design, shape))
        rows.append(member_row("->1", design, extreme_min_ud(design, mmn, field), "min UD extreme"))
        rows.append(member_row("0", design, extreme_max_od(design, mmn, field), "max OD extreme"))

        table = pd.DataFrame(rows)
        csv_path = out_dir / "family.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(csv_path, index=False)
        manifest.outputs["table"] = str(csv_path)

        if dump_field:
            manifest.outputs["overlap_field"] = str(write_vtk_volume(
                out_dir / "overlap_field.vtk", field.values, design.spacing, design.origin, "overlap"))
            manifest.outputs["omr_field"] = str(write_vtk_volume(
                out_dir / "omr_field.vtk", omr(field).as_float(), design.spacing, design.origin, "omr"))

    manifest.timings = timer.as_dict()
    manifest.summary = {
        "member_count": len(members),
        "members": rows,
        "mmn_measure": field.mmn_measure,
        "fft_max_deviation": field.max_deviation,
        "chi_design": rows[0]["chi"],
    }
    write_manifest(manifest, out_dir)
    if not quiet:
        print_family_table(rows)
    logger.info(f"✓ Family of {len(members)} written to {out_dir}")
    return manifest
