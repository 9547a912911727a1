"""Comparative topological analysis of design vs. as-manufactured shapes."""
