"""
Adaptive weighted kernel multi-view NMF clustering.
"""

__version__ = "0.1.0"
