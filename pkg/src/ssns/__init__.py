"""Pseudo-spectral Navier-Stokes simulator with Lorentz-space regularity diagnostics."""

__version__ = "0.1.0"
