"""Numerical laboratory for the second Picard iteration of the
Wick-ordered cubic Schrodinger equation with Gaussian random data,
on the unit sphere and on irrational rectangular tori."""

__version__ = "0.1.0"
