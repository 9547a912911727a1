"""
Core modules for configuration, errors and stage timing.
"""