"""Chaotic agent selection in gas-like money exchange markets."""

__version__ = "0.1.0"
