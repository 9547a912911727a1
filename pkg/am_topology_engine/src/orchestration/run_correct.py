"""
Correction flow: iterate the OMRT until the ledger is clean, then export.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Optional

try:
    from ..core.timing import StageTimer  # type: ignore
    from ..correct.loop import correct_loop  # type: ignore
    from ..correct.policy import CorrectionConfig, describe_config  # type: ignore
    from ..measure.overlap import overlap_field_fft  # type: ignore
    from ..voxel.io import load_grid, native_format, save_grid  # type: ignore
    from ..voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from .reports import (  # type: ignore
        RunManifest, file_sha256, print_correction_trace, write_json, write_manifest,
    )
    from .run_cta import export_report  # type: ignore
except Exception:
    from src.core.timing import StageTimer  # type: ignore
    from src.correct.loop import correct_loop  # type: ignore
    from src.correct.policy import CorrectionConfig, describe_config  # type: ignore
    from src.measure.overlap import overlap_field_fft  # type: ignore
    from src.voxel.io import load_grid, native_format, save_grid  # type: ignore
    from src.voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from src.orchestration.reports import (  # type: ignore
        RunManifest, file_sha256, print_correction_trace, write_json, write_manifest,
    )
    from src.orchestration.run_cta import export_report  # type: ignore

logger = logging.getLogger(__name__)

EXIT_NOT_CLEAN = 5


def load_config(config_path=None, overrides: Optional[Dict] = None) -> CorrectionConfig:
    """CorrectionConfig from an optional JSON file, then CLI overrides on top."""
    data: Dict = {}
    if config_path is not None:
        data.update(json.loads(Path(config_path).read_text()))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return CorrectionConfig(**data)


def run_correct(design_path, mmn_text: str, out_dir, config_path=None,
                overrides: Optional[Dict] = None, vtk: bool = False,
                workers: Optional[int] = None, quiet: bool = False) -> RunManifest:
    """Correct a design and write the final shape, OMRT trace and final report.

    The manifest's exit_code is 5 when the loop stopped without a clean ledger.
    """
    logger.info("=" * 60)
    logger.info("Starting CORRECT")
    logger.info("=" * 60)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = StageTimer()

    with timer.stage("load"):
        design = load_grid(design_path)
        spec = parse_mmn_spec(mmn_text, ndim=design.ndim)
        mmn = make_mmn(spec)
        cfg = load_config(config_path, overrides)

    manifest = RunManifest(
        command="correct",
        input_hashes={str(design_path): file_sha256(design_path)},
        mmn=spec.model_dump(),
        config=describe_config(cfg),
    )
    if config_path is not None:
        manifest.input_hashes[str(config_path)] = file_sha256(config_path)

    with timer.stage("overlap_field"):
        field = overlap_field_fft(design, mmn)
    with timer.stage("correction"):
        shape, trace = correct_loop(design, mmn, cfg, field, workers)

    with timer.stage("export"):
        manifest.outputs["corrected"] = str(save_grid(shape, out_dir / f"corrected.{native_format(design)}"))
        manifest.outputs["trace"] = str(write_json(out_dir / "trace.json", trace.to_dict()))
        trace_csv = out_dir / "trace.csv"
        trace.frame().to_csv(trace_csv, index=False)
        manifest.outputs["trace_table"] = str(trace_csv)
        if trace.final_report is not None:
            export_report(trace.final_report, out_dir, manifest, vtk)

    manifest.omrt = trace.final_omrt.to_dict()
    manifest.timings = timer.as_dict()
    manifest.summary = {
        "terminated_by": trace.terminated_by,
        "iterations": len(trace.iterations),
        "clean": trace.clean,
    }
    manifest.exit_code = 0 if trace.clean else EXIT_NOT_CLEAN
    write_manifest(manifest, out_dir)
    if not quiet:
        print_correction_trace(trace.to_dict())
    if trace.clean:
        logger.info(f"✓ Corrected shape written to {out_dir}")
    else:
        logger.warning(f"Correction not clean ({trace.terminated_by}); best effort written to {out_dir}")
    return manifest
