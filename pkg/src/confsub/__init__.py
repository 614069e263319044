"""Numerical verification toolkit for conformal Riemannian submersions."""

__version__ = "0.1.0"
