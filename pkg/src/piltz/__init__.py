"""Numerical laboratory for the Piltz divisor problem with k = 3, 4."""

__version__ = "0.1.0"
