"""Numerical radius and spatial numerical radius of operators on Hilbert C*-modules."""

__version__ = "0.1.0"
