"""Voxel grids, MMNs, file formats and synthetic parts."""
