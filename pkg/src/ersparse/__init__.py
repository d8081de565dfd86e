"""Simulation and numerical checks for extreme eigenvalues, largest degrees
and Poisson-binomial tails of sparse inhomogeneous random graphs."""

__version__ = "0.1.0"
