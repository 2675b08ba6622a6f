"""Numerical checks of Besov regularity estimates for 1D scalar conservation laws."""

__version__ = "0.1.0"
