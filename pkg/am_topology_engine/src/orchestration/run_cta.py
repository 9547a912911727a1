"""
CTA flow: compare a design with a manufactured shape and write the ledger report.
"""
import logging
from pathlib import Path
from typing import Optional

try:
    from ..core.timing import StageTimer  # type: ignore
    from ..cta.ledger import CtaReport, ledger  # type: ignore
    from ..measure.overlap import overlap_field_fft  # type: ignore
    from ..morphology.motion import as_manufactured  # type: ignore
    from ..morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from ..voxel.io import load_grid, native_format, save_grid  # type: ignore
    from ..voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from ..voxel.vtk import write_vtk_volume  # type: ignore
    from .reports import RunManifest, file_sha256, print_cta_report, write_json, write_manifest  # type: ignore
except Exception:
    from src.core.timing import StageTimer  # type: ignore
    from src.cta.ledger import CtaReport, ledger  # type: ignore
    from src.measure.overlap import overlap_field_fft  # type: ignore
    from src.morphology.motion import as_manufactured  # type: ignore
    from src.morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from src.voxel.io import load_grid, native_format, save_grid  # type: ignore
    from src.voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from src.voxel.vtk import write_vtk_volume  # type: ignore
    from src.orchestration.reports import (  # type: ignore
        RunManifest, file_sha256, print_cta_report, write_json, write_manifest,
    )

logger = logging.getLogger(__name__)


def export_report(report: CtaReport, out_dir: Path, manifest: RunManifest, vtk: bool = False,
                  report_name: str = "report.json"):
    """report.json, features.csv and, optionally, ecc/label VTK volumes."""
    manifest.outputs["report"] = str(write_json(out_dir / report_name, report.to_dict()))
    csv_path = out_dir / "features.csv"
    report.features_frame().to_csv(csv_path, index=False)
    manifest.outputs["features"] = str(csv_path)
    if vtk:
        manifest.outputs["ecc_field"] = str(write_vtk_volume(
            out_dir / "ecc_field.vtk", report.ecc_field(), report.spacing, report.origin, "ecc"))
        manifest.outputs["label_field"] = str(write_vtk_volume(
            out_dir / "label_field.vtk", report.label_field(), report.spacing, report.origin, "feature"))


def run_cta(design_path, out, manufactured_path=None, mmn_text: Optional[str] = None,
            lam: Optional[str] = None, vtk: bool = False, with_global: bool = True,
            workers: Optional[int] = None, quiet: bool = False) -> RunManifest:
    """Run the topology ledger on a design and its manufactured shape.

    The manufactured shape is either read from `manufactured_path` or
    computed from `mmn_text` and `lam`. `out` is a directory, or a *.json
    report path whose parent directory takes the other outputs.
    """
    logger.info("=" * 60)
    logger.info("Starting CTA")
    logger.info("=" * 60)
    out = Path(out)
    out_dir, report_name = (out.parent, out.name) if out.suffix == ".json" else (out, "report.json")
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = StageTimer()
    manifest = RunManifest(command="cta")

    with timer.stage("load"):
        design = load_grid(design_path)
        manifest.input_hashes[str(design_path)] = file_sha256(design_path)

    if manufactured_path is not None:
        with timer.stage("load"):
            manufactured = load_grid(manufactured_path)
            manifest.input_hashes[str(manufactured_path)] = file_sha256(manufactured_path)
    else:
        if mmn_text is None or lam is None:
            raise ValueError("cta needs either a manufactured grid or both an MMN and a lambda")
        spec = parse_mmn_spec(mmn_text, ndim=design.ndim)
        threshold = as_fraction(lam)
        manifest.mmn = spec.model_dump()
        manifest.lam = format_lambda(threshold)
        with timer.stage("as_manufactured"):
            mmn = make_mmn(spec)
            manufactured = as_manufactured(design, mmn, threshold, overlap_field_fft(design, mmn))
        manifest.outputs["manufactured"] = str(save_grid(manufactured, out_dir / f"manufactured.{native_format(design)}"))

    with timer.stage("ledger"):
        report = ledger(design, manufactured, workers, with_global=with_global)
    with timer.stage("export"):
        export_report(report, out_dir, manifest, vtk, report_name)

    manifest.timings = timer.as_dict()
    manifest.summary = {
        "chi_design": report.chi_design,
        "chi_manufactured": report.chi_manufactured,
        "delta_chi": report.delta_chi,
        "clean": report.is_clean,
        **report.aggregates(),
    }
    write_manifest(manifest, out_dir)
    if not quiet:
        print_cta_report(report.to_dict())
    logger.info(f"✓ CTA report written to {out_dir}")
    return manifest
