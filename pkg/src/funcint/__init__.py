"""Gaussian functional integrals with cardinal-tagged infinities."""
__version__ = "0.1.0"
