"""Skeleton-based long-horizon forecasting of network dynamics."""
__version__ = "0.1.0"
