"""Quadratic Poisson structures, q-deformed algebras and their classical/quantum checks."""

__version__ = "0.1.0"
