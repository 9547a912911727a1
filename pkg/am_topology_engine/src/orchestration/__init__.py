"""Orchestration layer for the family/cta/correct/slice flows."""
