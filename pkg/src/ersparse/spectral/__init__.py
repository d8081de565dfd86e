"""Operators for ``A``, ``E[A]`` and ``A - E[A]`` and their extreme eigenvalues."""

from .operators import (DENSE_SPECTRUM_LIMIT, StarSpectrum, SymmetricOperator,
                        adjacency_operator, centered_operator, dense_operator,
                        dense_spectrum, expectation_operator, sbm_expectation_eigenvalues,
                        spectral_norm, star_spectrum)
from .solver import REPORT_COLUMNS, SpectralReport, extreme_eigenvalues

__all__ = [
    "DENSE_SPECTRUM_LIMIT", "REPORT_COLUMNS", "SpectralReport", "StarSpectrum",
    "SymmetricOperator", "adjacency_operator", "centered_operator", "dense_operator",
    "dense_spectrum", "expectation_operator", "extreme_eigenvalues",
    "sbm_expectation_eigenvalues", "spectral_norm", "star_spectrum",
]
