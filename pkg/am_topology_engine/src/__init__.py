"""
AM Topology Engine
Comparative topological analysis of designs against their as-manufactured shapes.
"""

__version__ = "1.0.0"
__author__ = "AM Topology Engine"
__description__ = "Voxel-based manufacturability and topology deviation analysis"
