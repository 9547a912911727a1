"""
Legacy VTK (ASCII STRUCTURED_POINTS) writer for voxel volumes and scalar fields.

Values are written as CELL_DATA, one per voxel, x fastest. 2D arrays are
written as a single layer.
"""
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

_VTK_TYPES = {
    "b": "unsigned_char",
    "u": "unsigned_int",
    "i": "int",
    "f": "double",
}


def write_vtk_volume(path, values: np.ndarray, spacing: float = 1.0,
                     origin: Optional[Sequence[float]] = None, name: str = "scalars",
                     title: str = "am_topology_engine volume"):
    values = np.asarray(values)
    if values.ndim == 2:
        values = values[:, :, np.newaxis]
    if values.ndim != 3:
        raise ValueError(f"VTK volume needs a 2D or 3D array, got {values.ndim}D")
    origin = tuple(origin or (0.0,) * 3)
    if len(origin) == 2:
        origin = origin + (0.0,)

    kind = values.dtype.kind
    if kind == "b":
        values = values.astype(np.uint8)
    vtk_type = _VTK_TYPES.get(values.dtype.kind)
    if vtk_type is None:
        raise ValueError(f"unsupported dtype {values.dtype}")
    if values.dtype == np.uint8:
        vtk_type = "unsigned_char"
    fmt = "%.9g" if values.dtype.kind == "f" else "%d"

    nx, ny, nz = values.shape
    flat = values.ravel(order="F")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wt") as fp:
        fp.write("\n".join([
            "# vtk DataFile Version 3.0",
            title[:255],
            "ASCII",
            "DATASET STRUCTURED_POINTS",
            f"DIMENSIONS {nx + 1} {ny + 1} {nz + 1}",
            f"ORIGIN {origin[0]!r} {origin[1]!r} {origin[2]!r}",
            f"SPACING {spacing!r} {spacing!r} {spacing!r}",
            f"CELL_DATA {flat.size}",
            f"SCALARS {name} {vtk_type} 1",
            "LOOKUP_TABLE default\n",
        ]))
        # one row per x-line keeps files diffable
        np.savetxt(fp, flat.reshape(-1, nx), fmt=fmt)
    return path
