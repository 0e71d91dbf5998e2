"""Strained Gaussian vortices: asymptotic profiles, linear dynamics and direct simulation."""

__version__ = "0.1.0"
