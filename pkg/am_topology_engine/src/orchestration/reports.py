"""
Run manifests, JSON/CSV writers and console summaries.
"""
import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

try:
    from .. import __version__  # type: ignore
except Exception:
    from src import __version__  # type: ignore

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"

SLICE_CAVEAT = (
    "Per-slice topology preservation does not guarantee topology preservation "
    "of the stacked 3D part."
)


class RunManifest(BaseModel):
    """What a CLI run read, how it was configured, and what it wrote."""

    schema_version: str = SCHEMA_VERSION
    tool_version: str = __version__
    command: str
    started_at: datetime = Field(default_factory=datetime.utcnow)
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    mmn: Optional[Dict] = None
    lam: Optional[str] = None
    lambdas: Optional[List[str]] = None
    omrt: Optional[Dict] = None
    config: Optional[Dict] = None
    timings: Dict[str, float] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    summary: Dict = Field(default_factory=dict)
    exit_code: int = 0


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path, data: Dict) -> Path:
    """Write a JSON document, stamping schema_version if missing."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"schema_version": SCHEMA_VERSION, **data}
    path.write_text(json.dumps(payload, indent=2, default=str))
    return path


def write_manifest(manifest: RunManifest, out_dir) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest.outputs.setdefault("manifest", str(path))
    path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"Manifest written to {path}")
    return path


def print_family_table(rows: List[Dict]):
    print("\n" + "=" * 70)
    print("FAMILY")
    print("=" * 70)
    print(f"{'lambda':>12} {'volume':>10} {'chi':>6} {'UD vf':>8} {'OD vf':>8}  note")
    for row in rows:
        print(f"{row['lambda']:>12} {row['volume']:>10} {row['chi']:>6} "
              f"{row['ud_volume_fraction']:>8.4f} {row['od_volume_fraction']:>8.4f}  {row.get('note', '')}")
    print("=" * 70 + "\n")


def print_cta_report(report: Dict):
    agg = report["aggregates"]
    print("\n" + "=" * 70)
    print("COMPARATIVE TOPOLOGY REPORT")
    print("=" * 70)
    print(f"chi design {report['chi_design']}  ->  manufactured {report['chi_manufactured']}"
          f"  (delta {report['delta_chi']}, feature sum {report['signed_ecc_sum']})")
    print(f"UD: {agg['ud_components']} features ({agg['ud_nonsimple']} non-simple), "
          f"volume fraction {agg['ud_volume_fraction']:.4f}")
    print(f"OD: {agg['od_components']} features ({agg['od_nonsimple']} non-simple), "
          f"volume fraction {agg['od_volume_fraction']:.4f}")
    if "global" in report:
        g = report["global"]
        print(f"Betti design {g['design']['b0']},{g['design']['b1']},{g['design']['b2']}  "
              f"manufactured {g['manufactured']['b0']},{g['manufactured']['b1']},{g['manufactured']['b2']}")
    flagged = [f for f in report.get("features", []) if not f["simple"]]
    for f in flagged[:10]:
        print(f"  ⚠️  {f['kind']} #{f['id']}: ecc {f['ecc']:+d}, {f['voxel_count']} voxels at {f['centroid']}")
    if len(flagged) > 10:
        print(f"  ... {len(flagged) - 10} more non-simple features")
    print("=" * 70 + "\n")


def print_correction_trace(trace: Dict):
    print("\n" + "=" * 70)
    print(f"CORRECTION ({trace['terminated_by']})")
    print("=" * 70)
    for it in trace["iterations"]:
        print(f"  iter {it['iteration']:>3}: UD {it['nonsimple_ud']:>3}  OD {it['nonsimple_od']:>3}  "
              f"delta chi {it['delta_chi']:+d}  bumps {len(it['omrt']['bumps'])}")
    print("=" * 70 + "\n")
