"""Utility modules for hsdnet."""
