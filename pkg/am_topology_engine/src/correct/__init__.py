"""Iterative threshold correction driven by the topology ledger."""
