"""Numerical laboratory for the cubic slice f_a(z) = z^3 + a z^2 + z."""

__version__ = "0.1.0"
