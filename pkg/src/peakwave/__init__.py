"""Traveling periodic waves of a local shallow-water model: existence, stability and dynamics."""

__version__ = "0.1.0"
