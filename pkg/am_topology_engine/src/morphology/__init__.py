"""Threshold-based morphology: motion sets, sweeps, families, extremes."""
