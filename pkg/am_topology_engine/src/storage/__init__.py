"""
Storage modules for the run registry.
"""