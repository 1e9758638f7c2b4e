"""Batch analytics for tourist movement and photo themes at geofenced heritage sites."""

__version__ = "0.1.0"
