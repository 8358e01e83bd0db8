"""Numerical laboratory for maximal-regularity kernels of classical,
Bessel, harmonic-oscillator, and Laguerre semigroups."""

__version__ = "0.1.0"

__all__ = ["__version__"]
