"""Spectral gaps of quantum graphs and weighted graph Laplacians."""

__version__ = "0.1.0"
