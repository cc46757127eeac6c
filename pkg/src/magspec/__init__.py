"""Eigenvalue-counting formulas for magnetic Schrödinger-type operators,
cross-checked against discretised spectra."""

__version__ = "0.1.0"
