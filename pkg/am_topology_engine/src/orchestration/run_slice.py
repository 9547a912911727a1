"""
Slice flow: layer-by-layer 2D manufacturing and ledger, with a 3D restack.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

try:
    from ..core.config import resolve_workers  # type: ignore
    from ..core.timing import StageTimer  # type: ignore
    from ..cta.ledger import ledger  # type: ignore
    from ..morphology.motion import as_manufactured  # type: ignore
    from ..morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from ..voxel.grid import AXES, Slice, extract_slices, stack_slices  # type: ignore
    from ..voxel.io import load_grid, save_grid  # type: ignore
    from ..voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from .reports import SLICE_CAVEAT, RunManifest, file_sha256, write_json, write_manifest  # type: ignore
except Exception:
    from src.core.config import resolve_workers  # type: ignore
    from src.core.timing import StageTimer  # type: ignore
    from src.cta.ledger import ledger  # type: ignore
    from src.morphology.motion import as_manufactured  # type: ignore
    from src.morphology.thresholds import as_fraction, format_lambda  # type: ignore
    from src.voxel.grid import AXES, Slice, extract_slices, stack_slices  # type: ignore
    from src.voxel.io import load_grid, save_grid  # type: ignore
    from src.voxel.mmn import make_mmn, parse_mmn_spec  # type: ignore
    from src.orchestration.reports import (  # type: ignore
        SLICE_CAVEAT, RunManifest, file_sha256, write_json, write_manifest,
    )

logger = logging.getLogger(__name__)


def process_slice(layer: Slice, mmn, lam) -> Tuple[Slice, Dict]:
    """Manufacture one layer with a 2D MMN and run its ledger.

    Empty layers are passed through with an empty entry.
    """
    if layer.is_empty:
        return layer, {"layer": layer.layer, "empty": True}
    shape = as_manufactured(layer, mmn, lam)
    report = ledger(layer, shape, workers=1)
    entry = {
        "layer": layer.layer,
        "empty": False,
        "chi_design": report.chi_design,
        "chi_manufactured": report.chi_manufactured,
        "delta_chi": report.delta_chi,
        "clean": report.is_clean,
        **report.aggregates(),
        "nonsimple": [f.to_dict() for f in report.nonsimple_ud + report.nonsimple_od],
    }
    return layer.with_occupancy(shape.occupancy), entry


def slice_pipeline(design, mmn, lam, axis: str = "z",
                   workers: Optional[int] = None) -> Tuple[object, List[Dict]]:
    """Run process_slice over every layer in parallel and restack the results."""
    layers = extract_slices(design, axis)
    n = min(resolve_workers(workers), len(layers))
    with ThreadPoolExecutor(max_workers=max(n, 1)) as pool:
        results = list(pool.map(lambda s: process_slice(s, mmn, lam), layers))
    stacked = stack_slices([shape for shape, _ in results], axis, design.origin[AXES.index(axis)])
    return stacked, [entry for _, entry in results]


def aggregate_entries(entries: List[Dict]) -> Dict:
    active = [e for e in entries if not e["empty"]]
    return {
        "layers": len(entries),
        "empty_layers": len(entries) - len(active),
        "clean_layers": sum(1 for e in active if e["clean"]),
        "layers_with_chi_change": sum(1 for e in active if e["delta_chi"] != 0),
        "nonsimple_features": sum(len(e["nonsimple"]) for e in active),
    }


def run_slice(design_path, mmn_text: str, lam: str, out_dir, axis: str = "z",
              workers: Optional[int] = None) -> RunManifest:
    """2D per-slice pipeline along `axis`; the MMN spec is read as 2D."""
    logger.info("=" * 60)
    logger.info(f"Starting SLICE along {axis}")
    logger.info("=" * 60)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = StageTimer()

    with timer.stage("load"):
        design = load_grid(design_path)
        spec = parse_mmn_spec(mmn_text, ndim=2)
        mmn = make_mmn(spec)
        threshold = as_fraction(lam)

    with timer.stage("slices"):
        stacked, entries = slice_pipeline(design, mmn, threshold, axis, workers)

    manifest = RunManifest(
        command="slice",
        input_hashes={str(design_path): file_sha256(design_path)},
        mmn=spec.model_dump(),
        lam=format_lambda(threshold),
    )
    summary = aggregate_entries(entries)
    with timer.stage("export"):
        manifest.outputs["manufactured"] = str(save_grid(stacked, out_dir / "manufactured.binvox"))
        manifest.outputs["report"] = str(write_json(out_dir / "slices.json", {
            "axis": axis,
            "caveat": SLICE_CAVEAT,
            "summary": summary,
            "slices": entries,
        }))

    manifest.timings = timer.as_dict()
    manifest.summary = {**summary, "caveat": SLICE_CAVEAT}
    write_manifest(manifest, out_dir)
    logger.info(f"✓ {summary['layers']} slices processed, {summary['clean_layers']} clean")
    logger.warning(SLICE_CAVEAT)
    return manifest
