"""Dimer coverings of rail-yard graphs: exact partition functions, sampling,
contour-integral moments and scaling limits."""

__version__ = "0.1.0"
