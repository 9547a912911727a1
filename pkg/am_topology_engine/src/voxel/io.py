"""
Voxel file formats: binvox (run-length encoded) and raw (dims + packed bits).

binvox layout: ASCII header (`#binvox 1`, `dim nx ny nz`, `translate tx ty tz`,
`scale s`, `data`) followed by (value, count) byte pairs, count <= 255. Voxels
are stored x outermost, then z, then y fastest. `scale` is the physical size of
the longest grid edge, so spacing = scale / max(dims).

raw layout: three little-endian uint64 dims, then occupancy bits in canonical
order (x fastest), packed little-endian bit order, padded to a whole byte.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

try:
    from ..core.config import Settings  # type: ignore
    from ..core.errors import (  # type: ignore
        DimensionOverflowError, MalformedHeaderError, TruncatedStreamError,
    )
    from .grid import VoxelGrid  # type: ignore
    from .vtk import write_vtk_volume  # type: ignore
except Exception:
    from src.core.config import Settings  # type: ignore
    from src.core.errors import (  # type: ignore
        DimensionOverflowError, MalformedHeaderError, TruncatedStreamError,
    )
    from src.voxel.grid import VoxelGrid  # type: ignore
    from src.voxel.vtk import write_vtk_volume  # type: ignore

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BINVOX_MAGIC = b"#binvox"
RAW_HEADER = np.dtype("<u8")
MAX_RUN = 255


def _check_dims(dims: Tuple[int, ...], max_voxels: Optional[int]):
    limit = Settings.MAX_GRID_VOXELS if max_voxels is None else max_voxels
    if any(d < 1 for d in dims):
        raise MalformedHeaderError(f"dims must be positive, got {dims}")
    total = 1
    for d in dims:
        total *= d
    if total > limit:
        raise DimensionOverflowError(f"dims {dims} hold {total} voxels, limit is {limit}")
    return total


# ==================== binvox ====================

def _read_binvox_header(data: bytes):
    """Parse the ASCII header. Returns (dims, translate, scale, payload offset)."""
    pos = 0
    lines = []
    while True:
        end = data.find(b"\n", pos)
        if end < 0:
            raise MalformedHeaderError("binvox header ended before 'data' line")
        line = data[pos:end].strip()
        pos = end + 1
        if not lines:
            if not line.startswith(BINVOX_MAGIC):
                raise MalformedHeaderError(f"bad magic: {line[:16]!r}")
            lines.append(line)
            continue
        if line == b"data":
            break
        lines.append(line)

    dims = translate = scale = None
    for line in lines[1:]:
        key, _, rest = line.partition(b" ")
        try:
            if key == b"dim":
                dims = tuple(int(v) for v in rest.split())
            elif key == b"translate":
                translate = tuple(float(v) for v in rest.split())
            elif key == b"scale":
                scale = float(rest)
            else:
                raise MalformedHeaderError(f"unknown header keyword {key!r}")
        except ValueError as e:
            raise MalformedHeaderError(f"cannot parse header line {line!r}: {e}")

    if dims is None or len(dims) != 3:
        raise MalformedHeaderError(f"binvox needs a 3-entry dim line, got {dims}")
    translate = translate or (0.0, 0.0, 0.0)
    if len(translate) != 3:
        raise MalformedHeaderError(f"translate needs 3 entries, got {translate}")
    scale = 1.0 if scale is None else scale
    if not scale > 0:
        raise MalformedHeaderError(f"scale must be positive, got {scale}")
    return dims, translate, scale, pos


def decode_binvox(data: bytes, max_voxels: Optional[int] = None) -> VoxelGrid:
    """Decode binvox bytes into a VoxelGrid."""
    dims, translate, scale, offset = _read_binvox_header(data)
    total = _check_dims(dims, max_voxels)

    payload = np.frombuffer(data, dtype=np.uint8, offset=offset)
    if payload.size % 2:
        raise TruncatedStreamError("binvox payload has an odd number of bytes")
    values = payload[::2]
    counts = payload[1::2].astype(np.int64)
    if np.any(values > 1):
        raise MalformedHeaderError("binvox run values must be 0 or 1")
    decoded = int(counts.sum())
    if decoded < total:
        raise TruncatedStreamError(f"binvox stream holds {decoded} voxels, header promises {total}")
    if decoded > total:
        raise TruncatedStreamError(f"binvox stream holds {decoded} voxels, more than the {total} promised")

    nx, ny, nz = dims
    flat = np.repeat(values.astype(bool), counts)
    occ = flat.reshape((nx, nz, ny)).transpose(0, 2, 1)
    spacing = scale / max(dims)
    return VoxelGrid(occ, spacing, translate)


def encode_binvox(grid: VoxelGrid) -> bytes:
    """Encode a 3D grid as binvox bytes."""
    if grid.ndim != 3:
        raise ValueError("binvox holds 3D grids only")
    flat = np.ascontiguousarray(grid.occupancy.transpose(0, 2, 1)).ravel().astype(np.uint8)

    # run boundaries, then split runs longer than MAX_RUN
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [flat.size])))
    values = flat[starts]
    reps = (lengths + MAX_RUN - 1) // MAX_RUN
    run_values = np.repeat(values, reps)
    run_counts = np.full(run_values.size, MAX_RUN, dtype=np.int64)
    last = np.cumsum(reps) - 1
    run_counts[last] = lengths - (reps - 1) * MAX_RUN
    pairs = np.empty(2 * run_values.size, dtype=np.uint8)
    pairs[0::2] = run_values
    pairs[1::2] = run_counts

    nx, ny, nz = grid.dims
    scale = grid.spacing * max(grid.dims)
    header = (
        "#binvox 1\n"
        f"dim {nx} {ny} {nz}\n"
        f"translate {' '.join(repr(o) for o in grid.origin)}\n"
        f"scale {scale!r}\n"
        "data\n"
    ).encode("ascii")
    return header + pairs.tobytes()


# ==================== raw ====================

def decode_raw(data: bytes, max_voxels: Optional[int] = None) -> VoxelGrid:
    """Decode raw bytes (dims triple + packed bits) into a VoxelGrid."""
    header_size = 3 * RAW_HEADER.itemsize
    if len(data) < header_size:
        raise TruncatedStreamError(f"raw stream of {len(data)} bytes is shorter than its header")
    dims = tuple(int(d) for d in np.frombuffer(data[:header_size], dtype=RAW_HEADER))
    total = _check_dims(dims, max_voxels)
    expected = (total + 7) // 8
    body = len(data) - header_size
    if body != expected:
        raise TruncatedStreamError(f"raw payload is {body} bytes, dims {dims} need {expected}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8, offset=header_size),
                         count=total, bitorder="little")
    occ = bits.astype(bool).reshape(dims, order="F")
    return VoxelGrid(occ)


def encode_raw(grid: VoxelGrid) -> bytes:
    dims = grid.dims if grid.ndim == 3 else grid.dims + (1,)
    header = np.asarray(dims, dtype=RAW_HEADER).tobytes()
    packed = np.packbits(grid.linear_occupancy(), bitorder="little")
    return header + packed.tobytes()


# ==================== files ====================

FORMATS = ("binvox", "raw", "vtk")


def native_format(grid: VoxelGrid) -> str:
    """binvox for 3D grids, raw (as one layer) for 2D ones."""
    return "binvox" if grid.ndim == 3 else "raw"


def infer_format(path: PathLike) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in FORMATS:
        return suffix
    raise MalformedHeaderError(f"cannot infer voxel format from {path}; use .binvox, .raw or .vtk")


def load_grid(path: PathLike, fmt: Optional[str] = None,
              max_voxels: Optional[int] = None) -> VoxelGrid:
    """Load a voxel grid from disk.

    Raises:
        OSError: file cannot be read.
        GridParseError: malformed header, dimension overflow or truncated payload.
    """
    fmt = fmt or infer_format(path)
    data = Path(path).read_bytes()
    if fmt == "binvox":
        grid = decode_binvox(data, max_voxels)
    elif fmt == "raw":
        grid = decode_raw(data, max_voxels)
    else:
        raise MalformedHeaderError(f"cannot load format {fmt!r}")
    logger.info(f"Loaded {path}: dims {grid.dims}, {grid.volume} voxels")
    return grid


def save_grid(grid: VoxelGrid, path: PathLike, fmt: Optional[str] = None, name: str = "occupancy"):
    fmt = fmt or infer_format(path)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "binvox":
        path.write_bytes(encode_binvox(grid))
    elif fmt == "raw":
        path.write_bytes(encode_raw(grid))
    elif fmt == "vtk":
        write_vtk_volume(path, grid.occupancy.astype(np.uint8), spacing=grid.spacing,
                         origin=grid.origin, name=name)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    logger.debug(f"Saved {grid!r} to {path}")
    return path
