"""Finite partial dynamical systems and their relative crossed products."""

__version__ = "0.1.0"
