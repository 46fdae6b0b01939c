"""
hsdnet
Decompose a trained chain CNN into a class-hierarchical tree and cut
retraining-free subnetworks out of it.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
