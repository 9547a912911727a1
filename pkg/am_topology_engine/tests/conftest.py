"""
Shared fixtures, hypothesis strategies and brute-force oracles.
"""
import itertools
import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.voxel.grid import VoxelGrid  # noqa: E402
from src.voxel.mmn import mmn_offsets  # noqa: E402

RUN_SLOW = os.getenv("RUN_SLOW", "0").lower() in ("1", "true", "yes")


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    skip = pytest.mark.skip(reason="slow test, set RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True, scope="session")
def isolated_data_dir(tmp_path_factory):
    """Keep logs and the run database out of the working tree."""
    from src.core.config import Settings

    data = tmp_path_factory.mktemp("data")
    saved = (Settings.DATA_DIR, Settings.DATABASE_URL, Settings.WORKERS)
    Settings.DATA_DIR = str(data)
    Settings.DATABASE_URL = f"sqlite:///{data / 'runs.sqlite'}"
    Settings.WORKERS = 2
    yield data
    Settings.DATA_DIR, Settings.DATABASE_URL, Settings.WORKERS = saved


# ==================== Strategies ====================

def random_grid(rng: np.random.Generator, dims, density: float) -> VoxelGrid:
    return VoxelGrid(rng.random(dims) < density)


@st.composite
def occupancy_grids(draw, ndim: int = 3, max_side: int = 7, min_side: int = 1):
    """Small random occupancy grids with a drawn density."""
    dims = tuple(draw(st.integers(min_side, max_side)) for _ in range(ndim))
    density = draw(st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]))
    seed = draw(st.integers(0, 2**31 - 1))
    return random_grid(np.random.default_rng(seed), dims, density)


@st.composite
def mmn_grids(draw, ndim: int = 3, max_side: int = 3):
    """Random nonempty MMN grids, odd or even sized."""
    dims = tuple(draw(st.integers(1, max_side)) for _ in range(ndim))
    seed = draw(st.integers(0, 2**31 - 1))
    occ = np.random.default_rng(seed).random(dims) < 0.6
    occ[tuple((s - 1) // 2 for s in dims)] = True
    return VoxelGrid(occ)


@st.composite
def grid_pairs(draw, ndim: int = 3, max_side: int = 7):
    """(design, manufactured) drawn independently on one frame."""
    dims = tuple(draw(st.integers(1, max_side)) for _ in range(ndim))
    rng = np.random.default_rng(draw(st.integers(0, 2**31 - 1)))
    d1 = draw(st.sampled_from([0.2, 0.4, 0.6, 0.8]))
    d2 = draw(st.sampled_from([0.2, 0.4, 0.6, 0.8]))
    return random_grid(rng, dims, d1), random_grid(rng, dims, d2)


# ==================== Oracles ====================

def brute_overlap(design: VoxelGrid, mmn: VoxelGrid) -> np.ndarray:
    """OM(t) by visiting every translation and every MMN voxel."""
    occ = design.occupancy
    offsets = mmn_offsets(mmn)
    out = np.zeros(design.dims, dtype=np.int64)
    for t in itertools.product(*[range(n) for n in design.dims]):
        total = 0
        for off in offsets:
            p = tuple(int(a + b) for a, b in zip(t, off))
            if all(0 <= q < n for q, n in zip(p, design.dims)) and occ[p]:
                total += 1
        out[t] = total
    return out


def brute_sweep(translations: np.ndarray, mmn: VoxelGrid) -> np.ndarray:
    """Stamp the MMN at every translation, clipped to the frame."""
    out = np.zeros(translations.shape, dtype=bool)
    offsets = mmn_offsets(mmn)
    for t in map(tuple, np.argwhere(translations)):
        for off in offsets:
            p = tuple(int(a + b) for a, b in zip(t, off))
            if all(0 <= q < n for q, n in zip(p, translations.shape)):
                out[p] = True
    return out


def brute_euler(occupancy: np.ndarray) -> int:
    """chi by enumerating the cells of every voxel as (corner, extent) pairs."""
    occupancy = np.asarray(occupancy, dtype=bool)
    ndim = occupancy.ndim
    cells = set()
    for v in map(tuple, np.argwhere(occupancy)):
        for extent in itertools.product((0, 1), repeat=ndim):
            free = [i for i in range(ndim) if not extent[i]]
            for shift in itertools.product((0, 1), repeat=len(free)):
                corner = list(v)
                for i, s in zip(free, shift):
                    corner[i] += s
                cells.add((tuple(corner), extent))
    return sum((-1) ** sum(extent) for _, extent in cells)
