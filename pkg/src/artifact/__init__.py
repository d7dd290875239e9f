"""Tile inflation, transducers, and growth estimates on Bratteli diagram path spaces."""

__version__ = "0.1.0"
