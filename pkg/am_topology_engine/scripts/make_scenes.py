#!/usr/bin/env python3
"""
Script to write the synthetic test parts as voxel files for CLI use.
"""
import sys
import argparse
import logging
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.config import Settings
from src.voxel import scenes
from src.voxel.io import native_format, save_grid

# Setup logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

PAIRS = {
    "bridge": scenes.bridge_pair,
    "tunnel_plug": scenes.tunnel_plug_pair,
    "cavity_fill": scenes.cavity_fill_pair,
    "rounded_corner": scenes.rounded_corner_pair,
    "canceling": scenes.canceling_pair,
}

DESIGNS = {
    "three_beam_slice": scenes.three_beam_slice,
    "notched_bar": scenes.notched_bar,
    "slotted_frame": scenes.slotted_frame,
    "grid_lattice": scenes.grid_lattice,
    "hollow_shell": scenes.hollow_shell,
    "square_ring": scenes.square_ring,
}


def write_scenes(out_dir: Path) -> int:
    """Write every scene; pairs become <name>_design / <name>_manufactured."""
    written = 0
    for name, build in PAIRS.items():
        design, manufactured = build()
        save_grid(design, out_dir / f"{name}_design.{native_format(design)}")
        save_grid(manufactured, out_dir / f"{name}_manufactured.{native_format(manufactured)}")
        written += 2
    for name, build in DESIGNS.items():
        grid = build()
        save_grid(grid, out_dir / f"{name}.{native_format(grid)}")
        written += 1
    return written


def main():
    parser = argparse.ArgumentParser(description="Write synthetic test parts")
    parser.add_argument("--out", type=Path, default=Path(Settings.DATA_DIR) / "scenes",
                        help="Output directory (default: DATA_DIR/scenes)")
    args = parser.parse_args()

    count = write_scenes(args.out)
    logger.info(f"✓ Wrote {count} scene files to {args.out}")


if __name__ == "__main__":
    main()
