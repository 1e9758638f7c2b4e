"""Offline image-to-features adapter for the heritage-flow pipeline."""

__version__ = "0.1.0"
