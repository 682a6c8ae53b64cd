"""Quadratic lattices of signature (b, 2): local densities, Eisenstein coefficients,
archimedean Green-function pieces and lattice chains."""

__version__ = "0.1.0"
