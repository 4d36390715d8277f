"""Dimension conservation experiments for random walks on products of free groups."""

__version__ = "0.1.0"
