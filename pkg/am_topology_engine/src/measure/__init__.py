"""Overlap measure between a design and translated MMN copies."""
