"""Cubical complexes, Euler characteristic and Betti numbers."""
