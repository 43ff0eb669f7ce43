"""Exact Wei-Norman evolution of a two-mode non-stationary cavity."""

__version__ = "0.1.0"
