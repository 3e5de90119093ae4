"""Transductive local complexity: bounds, estimators and validation experiments."""

__version__ = "0.1.0"
BUILD = f"v{__version__}"
