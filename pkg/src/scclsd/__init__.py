"""Spectra of high-dimensional sample canonical correlations.

Finite-sample spectra (canonical correlations, block correlation matrix,
projection sum) and the limiting spectral distribution of the SCC matrix
under arbitrary-rank alternatives, each checked against the other.
"""

__version__ = "0.1.0"
